// Acceptance run: every criterion at full scale, one line each.

#include <cstdio>

#include "osl/parallel.hpp"
#include "osl/verify.hpp"

int main() {
  std::size_t failed = 0;
  osl::run_checks(osl::acceptance_checks(), osl::Scale::Full, osl::default_jobs(), [&](const osl::CheckResult& r) {
    std::printf("%s criterion %-2s %s: %s (%.2f s)\n", r.pass ? "PASS" : "FAIL", r.id.c_str(), r.name.c_str(),
                r.detail.c_str(), r.seconds);
    std::fflush(stdout);
    if (!r.pass) ++failed;
  });
  std::printf("%zu of %zu criteria failed\n", failed, osl::acceptance_checks().size());
  return failed == 0 ? 0 : 1;
}
