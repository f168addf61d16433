#include <cstdio>

int main() {
  std::puts("previz: work in progress");
  return 1;
}
