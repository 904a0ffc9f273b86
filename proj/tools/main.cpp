#include "syncslam/cli.hpp"

int main(int argc, char** argv) { return syncslam::run_cli(argc, argv); }
