#include "alspce/cli_app.hpp"

int main(int argc, char** argv) { return alspce::run_cli(argc, argv); }
