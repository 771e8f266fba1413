#include "spike/harness.hpp"

int main(int argc, char** argv) { return spike::cli(argc, argv); }
