#include "allpay/cli.hpp"

int main(int argc, char** argv) { return allpay::cli::run(argc, argv); }
