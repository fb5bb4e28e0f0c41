#include <cstdio>

int main() {
  std::fprintf(stderr, "mch: command line not wired up yet\n");
  return 1;
}
