#include <cstdio>

int main() {
    std::puts("mcrkit cli placeholder");
    return 0;
}
