#include <cstdio>
int main(int argc, char**){ (void)argc; std::puts("novarch placeholder"); return 0; }
