#include <doctest.h>

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bbm/branching.hpp"
#include "bbm/parallel.hpp"
#include "bbm/render.hpp"
#include "bbm/table.hpp"

using namespace bbm;

namespace {

// minimal well-formedness scan for the SVG we generate: tags balance and
// every '<' closes
bool xml_well_formed(const std::string& text) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '<') {
            ++i;
            continue;
        }
        const auto end = text.find('>', i);
        if (end == std::string::npos) return false;
        std::string tag = text.substr(i + 1, end - i - 1);
        i = end + 1;
        if (tag.empty()) return false;
        if (tag[0] == '?' || tag[0] == '!') continue;
        const bool closing = tag[0] == '/';
        const bool self_closing = tag.back() == '/';
        std::string name = tag.substr(closing ? 1 : 0);
        const auto sp = name.find_first_of(" \t\n/");
        if (sp != std::string::npos) name.resize(sp);
        if (closing) {
            if (stack.empty() || stack.back() != name) return false;
            stack.pop_back();
        } else if (!self_closing) {
            stack.push_back(name);
        }
    }
    return stack.empty();
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
    std::size_t count = 0, pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

}  // namespace

TEST_CASE("result tables emit 17-digit reproducible CSV") {
    ResultTable table;
    table.columns = {"y", "value"};
    table.seed = 7;
    table.grid_step = 1e-3;
    table.config_digest = config_digest({{"cmd", "test"}, {"n", "10"}});
    table.add_row({0.1 + 0.2, 1.0 / 3.0});
    const std::string csv = table.to_csv();

    CHECK(csv.find("seed=7") != std::string::npos);
    CHECK(csv.find("digest=" + table.config_digest) != std::string::npos);
    CHECK(csv.find("version=") != std::string::npos);
    CHECK(csv.find("y,value") != std::string::npos);

    // round-trip exactness of the numeric rendering
    const auto line = csv.substr(csv.rfind('\n', csv.size() - 2) + 1);
    const auto comma = line.find(',');
    CHECK(std::strtod(line.substr(0, comma).c_str(), nullptr) == 0.1 + 0.2);
    CHECK(std::strtod(line.substr(comma + 1).c_str(), nullptr) == 1.0 / 3.0);

    // identical inputs give byte-identical output
    CHECK(csv == table.to_csv());

    const auto parsed = nlohmann::json::parse(table.to_json());
    CHECK(parsed["columns"].size() == 2);
    CHECK(parsed["rows"].size() == 1);
}

TEST_CASE("config digest is canonical and sensitive") {
    const auto a = config_digest({{"x", "1"}, {"y", "2"}});
    const auto b = config_digest({{"y", "2"}, {"x", "1"}});
    const auto c = config_digest({{"x", "1"}, {"y", "3"}});
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.size() == 16);
}

TEST_CASE("row width is validated") {
    ResultTable table;
    table.columns = {"a", "b"};
    CHECK_THROWS_AS(table.add_row({1.0}), std::invalid_argument);
}

TEST_CASE("SVG render is well-formed and draws one polyline per particle") {
    SimConfig config;
    config.grid_step = 0.02;
    RngStream stream(101, 3);
    const auto tree = simulate_tree(ModelParams(2), std::vector<double>{0.0, 0.0},
                                    StopRule::at_population(60), PruneRule{}, config, stream);
    const auto svg = render_tree_svg(tree);
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(xml_well_formed(svg));
    CHECK(count_occurrences(svg, "<polyline") == tree.particles.size());
    CHECK_THROWS_AS(render_tree_svg(ParticleTree{}), std::invalid_argument);
}

TEST_CASE("parallel replicate results are worker-count independent") {
    auto run = [](int workers) {
        std::vector<double> out(64);
        parallel_replicates(64, workers, [&](std::int64_t i) {
            RngStream rng(7, derive_stream_id(1, static_cast<std::uint64_t>(i)));
            double acc = 0.0;
            for (int k = 0; k < 100; ++k) acc += rng.next_gaussian();
            out[static_cast<std::size_t>(i)] = acc;
        });
        return out;
    };
    const auto one = run(1);
    const auto two = run(2);
    const auto three = run(3);
    CHECK(one == two);
    CHECK(one == three);
}
