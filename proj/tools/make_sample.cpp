// Writes a small synthetic source set (events, CPI, land cover, regions,
// boundary, cities and a manifest) for trying the pipeline end to end.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "error.hpp"
#include "synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Write a synthetic sample source set"};
    std::string out;
    zinn::testing::SampleOptions o;
    app.add_option("out", out, "Output directory")->required();
    app.add_option("--events", o.events, "Number of events")->check(CLI::PositiveNumber);
    app.add_option("--seed", o.seed, "Random seed");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        const auto paths = zinn::testing::write_sample_sources(out, o);
        std::cout << "manifest " << paths.manifest.string() << "\nboundary " << paths.boundary.string()
                  << "\ncities " << paths.cities.string() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
