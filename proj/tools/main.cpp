#include "marketsieve/commands.hpp"

int main(int argc, char** argv) { return marketsieve::cli::run(argc, argv); }
