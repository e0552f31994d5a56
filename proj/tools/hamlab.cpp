#include "ham/cli.hpp"

int main(int argc, char** argv) { return ham::run(argc, argv); }
