#include <string>
#include <vector>

#include "stburgers/cli_app.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return stburgers::run_cli(std::move(args));
}
