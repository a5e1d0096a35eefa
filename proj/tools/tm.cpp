#include <cstdio>

int main() {
  std::puts("tm: scenario runner (subcommands pending)");
  return 0;
}
