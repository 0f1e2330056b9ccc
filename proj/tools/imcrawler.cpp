#include <string>
#include <vector>

#include "imcrawler/cli.hpp"

int main(int argc, char** argv)
{
    return imcrawler::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
