#include <algorithm>
#include <boost/crc.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "foilgen/dataset.hpp"
#include "foilgen/error.hpp"

using namespace foilgen;
using namespace foilgen::dataset;

namespace {

Dataset small_naca() {
    NacaGrid g;
    g.m_camber = {0.0, 0.02, 0.04};
    g.p_pos = {0.3, 0.5};
    g.t_thick = {0.08, 0.12};
    return build_naca(g, aero::FlowCondition{}, 248);
}

Dataset fake(std::size_t n, std::size_t points = 8) {
    Dataset d;
    d.points = points;
    for (std::size_t i = 0; i < n; ++i) {
        LabeledAirfoil a;
        a.id = i;
        a.family = i % 2 ? Family::Joukowski : Family::Naca;
        a.c_l = 0.1 * static_cast<double>(i);
        std::vector<geometry::Point2> pts(points);
        for (std::size_t k = 0; k < points; ++k) pts[k] = {static_cast<double>(k) / 7.0, 1.0 / 3.0 + static_cast<double>(i)};
        a.shape = geometry::AirfoilShape(std::move(pts));
        d.items.push_back(std::move(a));
    }
    return d;
}

std::string tmp_path(const char* name) { return (std::filesystem::temp_directory_path() / name).string(); }

}  // namespace

TEST_CASE("grid_range") {
    const auto v = grid_range(0.0, 0.2, 0.002);
    CHECK(v.size() == 101);
    CHECK(v[35] == 0.07);
    CHECK(v.back() == 0.2);
    CHECK(grid_range(0.06, 0.24, 0.01).size() == 19);
    CHECK_THROWS_AS(grid_range(0.0, 1.0, 0.0), ParameterError);
}

TEST_CASE("default NACA grid size is near the reference count") {
    const auto g = NacaGrid::defaults();
    const std::size_t n = g.t_thick.size() * (1 + (g.m_camber.size() - 1) * g.p_pos.size());
    CHECK(n == 3781);
    CHECK(std::abs(static_cast<double>(n) - 3696.0) / 3696.0 < 0.15);
}

TEST_CASE("build_naca single item and small grid") {
    NacaGrid one;
    one.m_camber = {0.02};
    one.p_pos = {0.4};
    one.t_thick = {0.12};
    BuildReport rep;
    const auto d = build_naca(one, aero::FlowCondition{}, 248, &rep);
    REQUIRE(d.items.size() == 1);
    CHECK(rep.candidates == 1);
    CHECK(d.items[0].params == std::vector<double>{0.02, 0.4, 0.12});
    CHECK(std::isfinite(d.items[0].c_l));
    CHECK(d.items[0].c_l > 0.0);
    CHECK(d.meta.count("naca.grid") == 1);

    const auto s = small_naca();
    // m=0 pairs only with p=0: 2 + 2*2*2.
    CHECK(s.items.size() == 10);
    std::set<std::uint64_t> ids;
    for (const auto& it : s.items) ids.insert(it.id);
    CHECK(ids.size() == s.items.size());
}

TEST_CASE("build_joukowski") {
    JoukowskiGrid g;
    g.a = {0.1};
    g.b = {0.05};
    g.stride = 1;
    const auto d = build_joukowski(g, aero::FlowCondition{}, 248);
    REQUIRE(d.items.size() == 1);
    const auto& p = d.items[0].params;
    REQUIRE(p.size() == 6);
    CHECK(p[2] == 1.1);
    const geometry::JoukowskiParams jp{0.1, 0.05, 1.1};
    CHECK(p[5] == jp.c_j());
    const auto direct = geometry::joukowski_airfoil(jp, 248);
    CHECK(p[3] == direct.ell);
    CHECK(p[4] == direct.m);
    CHECK(d.items[0].shape == direct.shape);

    // Candidate count on the full grid; a huge stride keeps the build cheap.
    auto full = JoukowskiGrid::defaults();
    full.stride = 1000000;
    BuildReport rep;
    build_joukowski(full, aero::FlowCondition{}, 248, &rep);
    CHECK(rep.candidates == 101 * 201 - 1);
}

TEST_CASE("degenerate Joukowski candidates are excluded with a reason") {
    JoukowskiGrid g;
    g.a = {0.0};
    g.b = {0.0, 0.05};
    g.stride = 1;
    BuildReport rep;
    const auto d = build_joukowski(g, aero::FlowCondition{}, 248, &rep);
    CHECK(rep.candidates == 1);
    CHECK(d.items.size() + rep.excluded.size() == 1);
    for (const auto& e : rep.excluded) CHECK(!e.reason.empty());
}

TEST_CASE("split") {
    const auto d10 = fake(10);
    const auto s = split(d10, 7);
    CHECK(s.train.size() == 9);
    CHECK(s.test.size() == 1);

    const auto d = fake(3696, 4);
    const auto a = split(d, 42);
    const auto b = split(d, 42);
    CHECK(a.train.size() == 3326);
    CHECK(a.test.size() == 370);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(split(d, 43).train != a.train);

    std::set<std::uint64_t> all(a.train.begin(), a.train.end());
    for (auto id : a.test) CHECK(all.insert(id).second);
    CHECK(all.size() == 3696);

    // Item order does not matter.
    auto rev = d;
    std::reverse(rev.items.begin(), rev.items.end());
    CHECK(split(rev, 42).train == a.train);

    CHECK_THROWS_AS(split(fake(9), 1), ParameterError);
}

TEST_CASE("duplicate_family") {
    const auto d = fake(10);
    CHECK(duplicate_family(d, Family::Joukowski, 1) == d);
    const auto t = duplicate_family(d, Family::Joukowski, 3);
    CHECK(t.count(Family::Joukowski) == 15);
    CHECK(t.count(Family::Naca) == 5);
    CHECK(t.items.size() == d.count(Family::Naca) + 3 * d.count(Family::Joukowski));
    std::set<std::uint64_t> ids;
    for (const auto& it : t.items) ids.insert(it.id);
    CHECK(ids.size() == t.items.size());
    CHECK(t.items[10].shape == d.items[1].shape);
    CHECK(t.items[10].c_l == d.items[1].c_l);
    CHECK_THROWS_AS(duplicate_family(d, Family::Naca, 0), ParameterError);
    CHECK_THROWS_AS(family_from_string("clark-y"), FormatError);
}

TEST_CASE("merge and select") {
    auto a = fake(3);
    auto b = fake(4);
    const auto m = merge(a, b);
    CHECK(m.items.size() == 7);
    CHECK(m.items[3].id == 3);
    CHECK(m.items[3].shape == b.items[0].shape);
    const auto sel = select(m, {5, 0});
    CHECK(sel[0]->id == 5);
    CHECK(sel[1]->id == 0);
    CHECK_THROWS_AS(select(m, {99}), ParameterError);
    b.points = 10;
    CHECK_THROWS_AS(merge(a, b), ParameterError);
}

TEST_CASE("save and load round trip") {
    auto d = small_naca();
    d.flow.alpha_deg = 3.25;
    d.items[1].c_l = 0.1 + 0.2;  // not representable in short decimal form
    const std::string path = tmp_path("foilgen_test_dataset.txt");
    save(d, path);
    const auto back = load(path);
    CHECK(back == d);
    CHECK(to_text(back) == to_text(d));

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("FOILGEN-DATASET v1 n=248 ", 0) == 0);
    std::remove(path.c_str());
}

TEST_CASE("load error paths") {
    const auto text = to_text(fake(12));
    CHECK_THROWS_AS(from_text(text.substr(0, text.size() / 2)), ChecksumError);
    CHECK_THROWS_AS(from_text(""), ChecksumError);

    std::string flipped = text;
    flipped[text.find("0.1")] = '9';
    CHECK_THROWS_AS(from_text(flipped), ChecksumError);

    // A future version with a valid checksum is a format error, not a checksum error.
    std::string body = text.substr(0, text.rfind("END "));
    body.replace(body.find(" v1 "), 4, " v2 ");
    boost::crc_32_type crc;
    crc.process_bytes(body.data(), body.size());
    char hex[16];
    std::snprintf(hex, sizeof hex, "%08x", crc.checksum());
    const std::string v2 = body + "END checksum=" + hex + "\n";
    try {
        from_text(v2);
        FAIL("expected FormatError");
    } catch (const ChecksumError&) {
        FAIL("version mismatch reported as checksum error");
    } catch (const FormatError&) {
    }
    CHECK_THROWS_AS(load(tmp_path("foilgen_no_such_file.txt")), Error);
}
