// Regenerates the frozen task assets (design matrix, stimulus, observations).
#include <cstdio>
#include <exception>

#include "sbi/tasks.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s OUTPUT_DIR\n", argv[0]);
    return 2;
  }
  try {
    sbi::write_task_assets(sbi::generate_task_assets(), argv[1]);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
