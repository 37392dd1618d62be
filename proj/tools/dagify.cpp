#include "dagforge/cli/dispatch.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return dagforge::dispatch("dagify", args);
}
