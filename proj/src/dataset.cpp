#include "foilgen/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "foilgen/error.hpp"
#include "foilgen/random.hpp"
#include "foilgen/textio.hpp"

namespace foilgen::dataset {

namespace {

constexpr std::string_view kMagic = "FOILGEN-DATASET";
constexpr int kVersion = 1;

using textio::fmt;
using textio::join;
using textio::parse_double;
using textio::parse_u64;
using textio::split_on;

// Label a batch of generated candidates; failures become exclusions.
void label_into(Dataset& out, std::vector<LabeledAirfoil> pending, BuildReport* report,
                const std::vector<std::string>& names) {
    std::vector<geometry::AirfoilShape> shapes;
    shapes.reserve(pending.size());
    for (const auto& p : pending) shapes.push_back(p.shape);
    const auto outcomes = aero::label_dataset(shapes, out.flow);
    for (std::size_t i = 0; i < pending.size(); ++i) {
        if (!outcomes[i].ok()) {
            if (report) report->excluded.push_back({names[i], "solver: " + outcomes[i].error});
            continue;
        }
        pending[i].c_l = *outcomes[i].c_l;
        pending[i].id = out.items.size();
        out.items.push_back(std::move(pending[i]));
    }
}

std::string describe_values(const std::vector<double>& v) {
    if (v.empty()) return "{}";
    if (v.size() <= 3) return "{" + join(v, ",") + "}";
    return "{" + fmt(v.front()) + "," + fmt(v[1]) + ",...," + fmt(v.back()) + "} (" + std::to_string(v.size()) + ")";
}

}  // namespace

std::string_view to_string(Family f) { return f == Family::Naca ? "naca" : "joukowski"; }

Family family_from_string(std::string_view s) {
    if (s == "naca") return Family::Naca;
    if (s == "joukowski") return Family::Joukowski;
    throw FormatError("unknown airfoil family '" + std::string(s) + "'");
}

std::size_t Dataset::count(Family f) const {
    return static_cast<std::size_t>(
        std::count_if(items.begin(), items.end(), [f](const LabeledAirfoil& a) { return a.family == f; }));
}

std::vector<double> grid_range(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw ParameterError("grid_range needs step > 0 and hi >= lo");
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
    std::vector<double> v(n);
    // Round to 12 decimals so 0.07 is the same double as the literal 0.07.
    for (std::size_t i = 0; i < n; ++i) v[i] = std::round((lo + step * static_cast<double>(i)) * 1e12) / 1e12;
    return v;
}

NacaGrid NacaGrid::defaults() {
    NacaGrid g;
    g.m_camber = grid_range(0.0, 0.09, 0.005);
    g.p_pos = grid_range(0.2, 0.7, 0.05);
    g.t_thick = grid_range(0.06, 0.24, 0.01);
    return g;
}

std::string NacaGrid::describe() const {
    return "m=" + describe_values(m_camber) + " p=" + describe_values(p_pos) + " t=" + describe_values(t_thick) +
           " (m=0 paired with p=0 only)";
}

JoukowskiGrid JoukowskiGrid::defaults() {
    JoukowskiGrid g;
    g.a = grid_range(0.0, 0.2, 0.002);
    g.b = grid_range(0.0, 0.2, 0.001);
    return g;
}

std::string JoukowskiGrid::describe() const {
    return "a=" + describe_values(a) + " b=" + describe_values(b) + " r=" + fmt(r) + " stride=" + std::to_string(stride) +
           " (a=b=0 excluded)";
}

Dataset build_naca(const NacaGrid& grid, const aero::FlowCondition& flow, std::size_t points, BuildReport* report) {
    flow.validate();
    Dataset out;
    out.points = points;
    out.flow = flow;
    std::vector<LabeledAirfoil> pending;
    std::vector<std::string> names;
    std::size_t candidates = 0;
    auto add = [&](double m, double p, double t) {
        ++candidates;
        const std::string name = "naca m=" + fmt(m) + " p=" + fmt(p) + " t=" + fmt(t);
        try {
            LabeledAirfoil a;
            a.family = Family::Naca;
            a.params = {m, p, t};
            a.shape = geometry::naca4_profile({m, p, t}, points);
            pending.push_back(std::move(a));
            names.push_back(name);
        } catch (const Error& e) {
            if (report) report->excluded.push_back({name, e.what()});
        }
    };
    for (double m : grid.m_camber) {
        for (double t : grid.t_thick) {
            if (m == 0.0) {
                add(0.0, 0.0, t);
                continue;
            }
            for (double p : grid.p_pos) add(m, p, t);
        }
    }
    if (report) report->candidates += candidates;
    label_into(out, std::move(pending), report, names);
    out.meta["naca.grid"] = grid.describe();
    out.meta["naca.candidates"] = std::to_string(candidates);
    return out;
}

Dataset build_joukowski(const JoukowskiGrid& grid, const aero::FlowCondition& flow, std::size_t points,
                        BuildReport* report) {
    flow.validate();
    if (grid.stride == 0) throw ParameterError("Joukowski stride must be >= 1");
    Dataset out;
    out.points = points;
    out.flow = flow;
    std::vector<LabeledAirfoil> pending;
    std::vector<std::string> names;
    std::size_t candidates = 0;
    for (double a : grid.a) {
        for (double b : grid.b) {
            if (a == 0.0 && b == 0.0) continue;  // flat plate
            const std::size_t k = candidates++;
            if (k % grid.stride != 0) continue;
            const std::string name = "joukowski a=" + fmt(a) + " b=" + fmt(b) + " r=" + fmt(grid.r);
            try {
                const geometry::JoukowskiParams prm{a, b, grid.r};
                auto j = geometry::joukowski_airfoil(prm, points);
                LabeledAirfoil item;
                item.family = Family::Joukowski;
                item.params = {a, b, grid.r, j.ell, j.m, prm.c_j()};
                item.shape = std::move(j.shape);
                pending.push_back(std::move(item));
                names.push_back(name);
            } catch (const Error& e) {
                if (report) report->excluded.push_back({name, e.what()});
            }
        }
    }
    if (report) report->candidates += candidates;
    label_into(out, std::move(pending), report, names);
    out.meta["joukowski.grid"] = grid.describe();
    out.meta["joukowski.candidates"] = std::to_string(candidates);
    return out;
}

Dataset merge(const Dataset& a, const Dataset& b) {
    if (a.points != b.points || !(a.flow == b.flow)) {
        throw ParameterError("merge: datasets differ in point count or flow condition");
    }
    Dataset out = a;
    std::uint64_t next = 0;
    for (const auto& it : a.items) next = std::max(next, it.id + 1);
    for (auto it : b.items) {
        it.id = next++;
        out.items.push_back(std::move(it));
    }
    for (const auto& [k, v] : b.meta) {
        if (!out.meta.emplace(k, v).second && out.meta[k] != v) out.meta[k + ".2"] = v;
    }
    return out;
}

DatasetSplit split(const Dataset& data, std::uint64_t seed, int train_parts, int test_parts) {
    if (train_parts <= 0 || test_parts <= 0) throw ParameterError("split ratio parts must be positive");
    const std::size_t n = data.items.size();
    if (n < 10) throw ParameterError("split needs at least 10 items, got " + std::to_string(n));
    std::vector<std::uint64_t> ids;
    ids.reserve(n);
    for (const auto& it : data.items) ids.push_back(it.id);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw FormatError("dataset ids are not unique");
    Rng rng(seed);
    rng.shuffle(ids.begin(), ids.end());
    const std::size_t n_train = n * static_cast<std::size_t>(train_parts) / static_cast<std::size_t>(train_parts + test_parts);
    DatasetSplit s;
    s.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
    s.train_parts = train_parts;
    s.test_parts = test_parts;
    s.seed = seed;
    return s;
}

Dataset duplicate_family(const Dataset& data, Family family, int factor) {
    if (factor < 1) throw ParameterError("duplication factor must be >= 1");
    Dataset out = data;
    std::uint64_t next = 0;
    for (const auto& it : data.items) next = std::max(next, it.id + 1);
    for (int copy = 1; copy < factor; ++copy) {
        for (const auto& it : data.items) {
            if (it.family != family) continue;
            LabeledAirfoil dup = it;
            dup.id = next++;
            out.items.push_back(std::move(dup));
        }
    }
    if (factor > 1) out.meta["duplicate." + std::string(to_string(family))] = std::to_string(factor);
    return out;
}

std::vector<const LabeledAirfoil*> select(const Dataset& data, const std::vector<std::uint64_t>& ids) {
    std::unordered_map<std::uint64_t, const LabeledAirfoil*> by_id;
    for (const auto& it : data.items) by_id.emplace(it.id, &it);
    std::vector<const LabeledAirfoil*> out;
    out.reserve(ids.size());
    for (auto id : ids) {
        const auto f = by_id.find(id);
        if (f == by_id.end()) throw ParameterError("dataset has no item with id " + std::to_string(id));
        out.push_back(f->second);
    }
    return out;
}

std::string to_text(const Dataset& data) {
    std::string s;
    s += std::string(kMagic) + " v" + std::to_string(kVersion) + " n=" + std::to_string(data.points) +
         " alpha=" + fmt(data.flow.alpha_deg) + " count=" + std::to_string(data.items.size()) + "\n";
    for (const auto& [k, v] : data.meta) {
        if (k.find_first_of("\t\n") != std::string::npos || v.find_first_of("\t\n") != std::string::npos) {
            throw FormatError("dataset metadata may not contain tabs or newlines");
        }
        s += "meta\t" + k + "\t" + v + "\n";
    }
    for (const auto& it : data.items) {
        if (it.shape.size() != data.points) throw ShapeError("item " + std::to_string(it.id) + " has the wrong point count");
        s += std::to_string(it.id) + "\t" + std::string(to_string(it.family)) + "\t" + join(it.params, ",") + "\t" +
             fmt(it.c_l);
        for (const auto& p : it.shape.points()) s += "\t" + fmt(p.x);
        for (const auto& p : it.shape.points()) s += "\t" + fmt(p.y);
        s += "\n";
    }
    return textio::seal(std::move(s));
}

Dataset from_text(std::string_view text) {
    const auto lines = textio::unseal(text, "dataset file");
    const auto header = split_on(lines.at(0), ' ');
    if (header.size() != 5 || header[0] != kMagic) throw FormatError("not a foilgen dataset file");
    if (header[1] != "v" + std::to_string(kVersion)) {
        throw FormatError("unsupported dataset version '" + std::string(header[1]) + "'");
    }
    auto field = [&](std::size_t i, std::string_view key) {
        if (header[i].substr(0, key.size()) != key) throw FormatError("bad dataset header");
        return header[i].substr(key.size());
    };
    Dataset d;
    d.points = parse_u64(field(2, "n="), "point count");
    d.flow.alpha_deg = parse_double(field(3, "alpha="), "alpha");
    const std::uint64_t count = parse_u64(field(4, "count="), "item count");

    const std::size_t n = d.points;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto cols = split_on(lines[li], '\t');
        if (cols[0] == "meta") {
            if (cols.size() != 3) throw FormatError("bad metadata line");
            d.meta[std::string(cols[1])] = std::string(cols[2]);
            continue;
        }
        if (cols.size() != 4 + 2 * n) {
            throw FormatError("record on line " + std::to_string(li + 1) + " has " + std::to_string(cols.size()) +
                              " fields, expected " + std::to_string(4 + 2 * n));
        }
        LabeledAirfoil it;
        it.id = parse_u64(cols[0], "id");
        it.family = family_from_string(cols[1]);
        if (!cols[2].empty()) {
            for (auto p : split_on(cols[2], ',')) it.params.push_back(parse_double(p, "parameter"));
        }
        it.c_l = parse_double(cols[3], "lift coefficient");
        std::vector<geometry::Point2> pts(n);
        for (std::size_t i = 0; i < n; ++i) {
            pts[i].x = parse_double(cols[4 + i], "coordinate");
            pts[i].y = parse_double(cols[4 + n + i], "coordinate");
        }
        it.shape = geometry::AirfoilShape(std::move(pts));
        d.items.push_back(std::move(it));
    }
    if (d.items.size() != count) {
        throw FormatError("dataset header declares " + std::to_string(count) + " items, file has " +
                          std::to_string(d.items.size()));
    }
    return d;
}

void save(const Dataset& data, const std::string& path) { textio::write_file(path, to_text(data)); }

Dataset load(const std::string& path) { return from_text(textio::read_file(path)); }

}  // namespace foilgen::dataset
