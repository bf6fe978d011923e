#include <cstdio>

int main() {
    std::puts("lmcount: CLI under construction");
    return 1;
}
