#include "disfluency/cli.hpp"

int main(int argc, char** argv) { return disfl::cli::run(argc, argv); }
