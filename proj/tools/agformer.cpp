#include <malloc.h>

#include <iostream>

#include "agformer/cli.hpp"

int main(int argc, char** argv) {
  // Keep large tensor buffers in the heap instead of mmap/munmap on every op.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  return agf::cli::run(argc, argv, std::cout, std::cerr);
}
