#include "qchom/qchom.hpp"
int main() { return 0; }
