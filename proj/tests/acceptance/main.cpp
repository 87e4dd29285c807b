#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "criteria.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"acceptance criteria"};
    acceptance::Options opt;
    int only = 0;
    app.add_option("--only", only, "run a single criterion")->check(CLI::Range(1, acceptance::kCriteria));
    app.add_option("--seed", opt.seed, "base seed");
    CLI11_PARSE(app, argc, argv);

    std::vector<acceptance::Result> results;
    auto print = [](const acceptance::Result& r) { std::cout << acceptance::format_line(r) << std::endl; };
    if (only)
        print(results.emplace_back(acceptance::run(only, opt)));
    else
        results = acceptance::run_all(opt, print);

    long passed = 0;
    for (const auto& r : results) passed += r.pass;
    std::cout << passed << "/" << results.size() << " criteria pass" << std::endl;
    return passed == static_cast<long>(results.size()) ? 0 : 3;
}
