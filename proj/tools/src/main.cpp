#include "commands.hpp"

int main(int argc, char** argv) { return osl::cli::main_entry(argc, argv); }
