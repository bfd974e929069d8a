#include <stdio.h>
#include "ccsim.h"
int main(void) {
  const char *toml = "n = 4\nt = 1\nvalues = [1, 1, 1, 1]\nlayer = \"l1\"\nbase = \"scripted:echo\"\n";
  CcsimScenario *s = NULL; CcsimTrace *t = NULL;
  if (ccsim_scenario_parse(toml, &s) != CCSIM_STATUS_OK) { printf("parse: %s\n", ccsim_last_error()); return 1; }
  if (ccsim_run(s, &t) != CCSIM_STATUS_OK) { printf("run: %s\n", ccsim_last_error()); return 1; }
  CcsimDecision d; ccsim_trace_decision(t, 0, &d);
  CcsimBits b; ccsim_trace_bits(t, &b);
  printf("version %s: p0 decided=%d value=%u time=%u bits=%llu\n", ccsim_version(), d.decided, d.value, d.time, (unsigned long long)b.bits_total);
  ccsim_trace_free(t); ccsim_scenario_free(s);
  return 0;
}
