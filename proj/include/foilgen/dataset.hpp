#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "foilgen/aero.hpp"
#include "foilgen/geometry.hpp"

namespace foilgen::dataset {

enum class Family { Naca, Joukowski };

std::string_view to_string(Family f);
Family family_from_string(std::string_view s);

struct LabeledAirfoil {
    std::uint64_t id = 0;
    Family family = Family::Naca;
    // NACA: (m, p, t). Joukowski: (a, b, r, ell, m, c_J).
    std::vector<double> params;
    geometry::AirfoilShape shape;
    double c_l = 0.0;

    friend bool operator==(const LabeledAirfoil&, const LabeledAirfoil&) = default;
};

struct Dataset {
    std::size_t points = geometry::kDefaultPoints;
    aero::FlowCondition flow;
    std::vector<LabeledAirfoil> items;
    // Free-form provenance (grid, stride, exclusions); persisted with the data.
    std::map<std::string, std::string> meta;

    std::size_t count(Family f) const;
    friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct Exclusion {
    std::string what;    // generating parameters
    std::string reason;
};

struct BuildReport {
    std::size_t candidates = 0;
    std::vector<Exclusion> excluded;
};

struct NacaGrid {
    std::vector<double> m_camber;  // 0 entries pair only with p = 0
    std::vector<double> p_pos;
    std::vector<double> t_thick;

    // m in {0, 0.005, ..., 0.09}, p in {0.2, 0.25, ..., 0.7}, t in {0.06, 0.07, ..., 0.24}:
    // 3781 sections.
    static NacaGrid defaults();
    std::string describe() const;
};

struct JoukowskiGrid {
    std::vector<double> a;
    std::vector<double> b;
    double r = 1.1;
    // Keep every stride-th candidate of the (a, b) grid in a-major order.
    std::size_t stride = 5;

    // a in {0, 0.002, ..., 0.2}, b in {0, 0.001, ..., 0.2}, r = 1.1, stride 5.
    static JoukowskiGrid defaults();
    std::string describe() const;
};

// Evenly spaced values lo, lo + step, ..., hi (inclusive, rounded to the step).
std::vector<double> grid_range(double lo, double hi, double step);

Dataset build_naca(const NacaGrid& grid, const aero::FlowCondition& flow, std::size_t points = geometry::kDefaultPoints,
                   BuildReport* report = nullptr);
Dataset build_joukowski(const JoukowskiGrid& grid, const aero::FlowCondition& flow,
                        std::size_t points = geometry::kDefaultPoints, BuildReport* report = nullptr);

// Items of b appended after a with fresh ids; metadata merged with prefixes.
Dataset merge(const Dataset& a, const Dataset& b);

struct DatasetSplit {
    std::vector<std::uint64_t> train;
    std::vector<std::uint64_t> test;
    int train_parts = 9;
    int test_parts = 1;
    std::uint64_t seed = 0;
};

// Ids are sorted, shuffled with the seed, and the first
// floor(N * train / (train + test)) go to training.
DatasetSplit split(const Dataset& data, std::uint64_t seed, int train_parts = 9, int test_parts = 1);

Dataset duplicate_family(const Dataset& data, Family family, int factor);

// Returns the items with the given ids, in the order of `ids`.
std::vector<const LabeledAirfoil*> select(const Dataset& data, const std::vector<std::uint64_t>& ids);

std::string to_text(const Dataset& data);
Dataset from_text(std::string_view text);
void save(const Dataset& data, const std::string& path);
Dataset load(const std::string& path);

}  // namespace foilgen::dataset
