#include "eba/cli.hpp"

int main(int argc, char** argv) { return eba::parse_and_dispatch(argc, argv); }
