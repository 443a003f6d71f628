#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <set>
#include <vector>

#include "fdrelay/constellation.hpp"
#include "fdrelay/rng.hpp"

using fdrelay::Constellation;
using fdrelay::count_errors;
using fdrelay::cxd;

namespace {

// independent oracle: nearest point by direct distance scan
int brute_force_nearest(const Constellation& c, cxd z) {
    int best = 0;
    double best_d = std::abs(z - c.point(0));
    for (int i = 1; i < c.order(); ++i) {
        const double d = std::abs(z - c.point(i));
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("4-QAM fixed mapping") {
    const auto c = Constellation::make(4);
    const double s = 1.0 / std::sqrt(2.0);

    const std::vector<std::uint8_t> bits{0, 0, 0, 1, 1, 0, 1, 1};
    const auto sym = c.map_bits(bits);
    REQUIRE(sym.size() == 4);
    CHECK(sym[0].real() == Catch::Approx(s));
    CHECK(sym[0].imag() == Catch::Approx(s));
    CHECK(sym[1].real() == Catch::Approx(s));
    CHECK(sym[1].imag() == Catch::Approx(-s));
    CHECK(sym[2].real() == Catch::Approx(-s));
    CHECK(sym[2].imag() == Catch::Approx(s));
    CHECK(sym[3].real() == Catch::Approx(-s));
    CHECK(sym[3].imag() == Catch::Approx(-s));
}

TEST_CASE("16-QAM normalization and corner label") {
    const auto c = Constellation::make(16);

    // oracle: enumerate the unnormalized grid and compute the scale by a
    // brute-force energy sum
    double raw_energy = 0.0;
    for (int i : {-3, -1, 1, 3})
        for (int q : {-3, -1, 1, 3}) raw_energy += static_cast<double>(i * i + q * q);
    const double scale = std::sqrt(16.0 / raw_energy);
    CHECK(scale == Catch::Approx(1.0 / std::sqrt(10.0)).epsilon(1e-14));

    double mean_energy = 0.0;
    for (int i = 0; i < 16; ++i) mean_energy += std::norm(c.point(i));
    mean_energy /= 16.0;
    CHECK(std::abs(mean_energy - 1.0) < 1e-12);

    // all-zero label sits at the (+,+) corner
    const auto corner = c.map_bits(std::vector<std::uint8_t>{0, 0, 0, 0});
    CHECK(corner[0].real() == Catch::Approx(3.0 * scale).epsilon(1e-12));
    CHECK(corner[0].imag() == Catch::Approx(3.0 * scale).epsilon(1e-12));
}

TEST_CASE("constellation invariants for all supported orders") {
    for (int m : {4, 16, 64}) {
        const auto c = Constellation::make(m);
        INFO("M = " << m);

        double mean_energy = 0.0;
        std::set<std::pair<double, double>> uniq;
        for (int i = 0; i < m; ++i) {
            mean_energy += std::norm(c.point(i));
            uniq.insert({c.point(i).real(), c.point(i).imag()});
        }
        CHECK(std::abs(mean_energy / m - 1.0) < 1e-12);
        CHECK(uniq.size() == static_cast<std::size_t>(m));

        // symmetric under negation and conjugation
        for (int i = 0; i < m; ++i) {
            CHECK(uniq.count({-c.point(i).real(), -c.point(i).imag()}) == 1);
            CHECK(uniq.count({c.point(i).real(), -c.point(i).imag()}) == 1);
        }

        // label round trip through map -> quantize -> demap
        for (unsigned lab = 0; lab < static_cast<unsigned>(m); ++lab) {
            const cxd p = c.point_of_label(lab);
            const int idx = c.nearest_index(p);
            CHECK(c.label(idx) == lab);
        }
    }
}

TEST_CASE("quantizer is the exact argmin") {
    const auto c = Constellation::make(16);

    SECTION("idempotent on constellation points") {
        for (int i = 0; i < 16; ++i) {
            const auto q = c.quantize(std::vector<cxd>{c.point(i)});
            CHECK(q[0] == c.point(i));
        }
    }

    SECTION("far-out input snaps to the nearest corner") {
        const auto c4 = Constellation::make(4);
        const auto q = c4.quantize(std::vector<cxd>{{10.0, 0.1}});
        // oracle: scan all 4 points
        const int expect = brute_force_nearest(c4, {10.0, 0.1});
        CHECK(q[0] == c4.point(expect));
        CHECK(q[0].real() == Catch::Approx(1.0 / std::sqrt(2.0)));
        CHECK(q[0].imag() == Catch::Approx(1.0 / std::sqrt(2.0)));
    }

    SECTION("equidistant tie resolves to the smallest index") {
        for (int m : {4, 16, 64}) {
            const auto cm = Constellation::make(m);
            CHECK(cm.nearest_index({0.0, 0.0}) ==
                  brute_force_nearest(cm, {0.0, 0.0}));
            // origin is equidistant from the four innermost points; the
            // smallest index among them must win deterministically
            const int idx = cm.nearest_index({0.0, 0.0});
            for (int i = 0; i < idx; ++i)
                CHECK(std::abs(cm.point(i)) > std::abs(cm.point(idx)) - 1e-15);
        }
    }

    SECTION("agreement with exhaustive search on random inputs") {
        fdrelay::Rng rng(42);
        for (int m : {4, 16, 64}) {
            const auto cm = Constellation::make(m);
            for (int n = 0; n < 10000 / 3; ++n) {
                const cxd z{4.0 * (rng.uniform() - 0.5), 4.0 * (rng.uniform() - 0.5)};
                CHECK(cm.nearest_index(z) == brute_force_nearest(cm, z));
            }
        }
    }
}

TEST_CASE("map_bits input contract") {
    const auto c = Constellation::make(16);
    CHECK_THROWS_AS(c.map_bits(std::vector<std::uint8_t>{0, 1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(Constellation::make(8), std::invalid_argument);
    CHECK_THROWS_AS(Constellation::make(32), std::invalid_argument);
}

TEST_CASE("error counting") {
    const std::vector<std::uint8_t> a{1, 0, 1, 1, 0, 0, 1, 0};

    SECTION("identical streams") {
        const auto c = count_errors(a, a, 4);
        CHECK(c.bit_errors == 0);
        CHECK(c.symbol_errors == 0);
    }

    SECTION("single flipped bit") {
        auto b = a;
        b[5] ^= 1;
        const auto c = count_errors(a, b, 4);
        CHECK(c.bit_errors == 1);
        CHECK(c.symbol_errors == 1);
    }

    SECTION("all bits flipped") {
        const int n_sym = 6;
        std::vector<std::uint8_t> tx, rx;
        fdrelay::Rng rng(7);
        for (int i = 0; i < 4 * n_sym; ++i) {
            tx.push_back(static_cast<std::uint8_t>(rng.bit()));
            rx.push_back(tx.back() ^ 1u);
        }
        const auto c = count_errors(tx, rx, 4);
        CHECK(c.bit_errors == static_cast<std::uint64_t>(4 * n_sym));
        CHECK(c.symbol_errors == static_cast<std::uint64_t>(n_sym));
    }

    SECTION("length mismatch rejected") {
        const std::vector<std::uint8_t> b{1, 0};
        CHECK_THROWS_AS(count_errors(a, b, 4), std::invalid_argument);
    }
}

TEST_CASE("bit round trip through the modem") {
    fdrelay::Rng rng(11);
    for (int m : {4, 16, 64}) {
        const auto c = Constellation::make(m);
        const int bps = c.bits_per_symbol();
        std::vector<std::uint8_t> bits;
        for (int i = 0; i < bps * 50; ++i) bits.push_back(static_cast<std::uint8_t>(rng.bit()));
        const auto sym = c.map_bits(bits);
        std::vector<std::uint8_t> back;
        for (const auto& s : sym) c.append_bits(c.nearest_index(s), back);
        CHECK(back == bits);
    }
}
