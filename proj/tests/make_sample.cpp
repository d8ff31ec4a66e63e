// Writes <prefix>.qf1 and <prefix>.qt1 sample files for the CLI tests.

#include <cstdio>
#include <string>

#include "qten/models.hpp"
#include "qten/qtensor.hpp"
#include "qten/solvers.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_sample <prefix>\n");
    return 1;
  }
  const std::string prefix = argv[1];
  qten::SolverConfig cfg;
  cfg.seed = 424242;
  const qten::CpdFactors f = qten::initialize({6, 5, 6}, 2, cfg);
  qten::save_qf1(f, prefix + ".qf1");
  qten::save_qt1(qten::cpd_reconstruct(f), prefix + ".qt1");
  std::printf("wrote %s.qf1 and %s.qt1\n", prefix.c_str(), prefix.c_str());
  return 0;
}
