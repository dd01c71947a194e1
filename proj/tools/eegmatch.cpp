#include <malloc.h>

#include "eegmatch/cli.hpp"

int main(int argc, char** argv) {
  // Per-step tensors are large and short-lived; mmap/munmap churn dominates otherwise.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  return eegmatch::run_cli(argc, argv);
}
