#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace fdrelay {

using cxd = std::complex<double>;

struct ErrorCounts {
    std::uint64_t bit_errors = 0;
    std::uint64_t symbol_errors = 0;
};

/// Square M-QAM constellation with unit mean symbol energy.
///
/// Bit labeling: a symbol label of 2q bits is split MSB-first into an
/// in-phase group (first q bits) and a quadrature group (last q bits).
/// Each axis uses a binary-reflected Gray code with label 0 at the most
/// positive coordinate, so label 00 maps to the (+,+) corner: for 4-QAM,
/// bits 00 -> (+1+1j)/sqrt(2); for 16-QAM, bits 0000 -> (3+3j)/sqrt(10).
class Constellation {
  public:
    static Constellation make(int order) {
        if (order != 4 && order != 16 && order != 64)
            throw std::invalid_argument("Constellation: order must be 4, 16 or 64");
        return Constellation(order);
    }

    int order() const { return order_; }
    int bits_per_symbol() const { return bits_per_symbol_; }

    /// Point at constellation index i (grid order, see nearest_index).
    cxd point(int i) const { return points_[static_cast<std::size_t>(i)]; }

    /// Bit label of constellation index i.
    unsigned label(int i) const { return labels_[static_cast<std::size_t>(i)]; }

    /// Constellation index carrying bit label `lab`.
    int index_of_label(unsigned lab) const {
        return index_of_label_[static_cast<std::size_t>(lab)];
    }

    cxd point_of_label(unsigned lab) const { return points_[static_cast<std::size_t>(index_of_label(lab))]; }

    /// Index of the point closest in Euclidean distance to z.
    /// Ties resolve to the smallest constellation index.
    int nearest_index(cxd z) const {
        int best = 0;
        double best_d = std::norm(z - points_[0]);
        for (int i = 1; i < order_; ++i) {
            const double d = std::norm(z - points_[static_cast<std::size_t>(i)]);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    }

    /// Maps log2(M)*n bits (values 0/1, MSB of each symbol first) to n points.
    std::vector<cxd> map_bits(std::span<const std::uint8_t> bits) const {
        if (bits.size() % static_cast<std::size_t>(bits_per_symbol_) != 0)
            throw std::invalid_argument("map_bits: bit count not divisible by log2(M)");
        std::vector<cxd> out(bits.size() / static_cast<std::size_t>(bits_per_symbol_));
        for (std::size_t s = 0; s < out.size(); ++s) {
            unsigned lab = 0;
            for (int b = 0; b < bits_per_symbol_; ++b)
                lab = (lab << 1) | bits[s * static_cast<std::size_t>(bits_per_symbol_) +
                                        static_cast<std::size_t>(b)];
            out[s] = point_of_label(lab);
        }
        return out;
    }

    /// Symbol-wise minimum-distance quantizer onto the constellation set.
    std::vector<cxd> quantize(std::span<const cxd> y) const {
        std::vector<cxd> out(y.size());
        for (std::size_t i = 0; i < y.size(); ++i)
            out[i] = points_[static_cast<std::size_t>(nearest_index(y[i]))];
        return out;
    }

    /// Appends the label bits of constellation index i, MSB first.
    void append_bits(int i, std::vector<std::uint8_t>& out) const {
        const unsigned lab = label(i);
        for (int b = bits_per_symbol_ - 1; b >= 0; --b)
            out.push_back(static_cast<std::uint8_t>((lab >> b) & 1u));
    }

  private:
    explicit Constellation(int order) : order_(order) {
        bits_per_symbol_ = std::bit_width(static_cast<unsigned>(order)) - 1;
        side_ = 1 << (bits_per_symbol_ / 2);
        const int q = bits_per_symbol_ / 2;
        // scale s.t. (1/M) sum |s_i|^2 = 1 for the {..,-3,-1,1,3,..} grid
        const double a = std::sqrt(3.0 / (2.0 * (order_ - 1)));
        points_.resize(static_cast<std::size_t>(order_));
        labels_.resize(static_cast<std::size_t>(order_));
        index_of_label_.resize(static_cast<std::size_t>(order_));
        for (int ii = 0; ii < side_; ++ii) {
            for (int iq = 0; iq < side_; ++iq) {
                const int idx = ii * side_ + iq;
                const double re = a * static_cast<double>(side_ - 1 - 2 * ii);
                const double im = a * static_cast<double>(side_ - 1 - 2 * iq);
                const unsigned gi = static_cast<unsigned>(ii ^ (ii >> 1));
                const unsigned gq = static_cast<unsigned>(iq ^ (iq >> 1));
                const unsigned lab = (gi << q) | gq;
                points_[static_cast<std::size_t>(idx)] = {re, im};
                labels_[static_cast<std::size_t>(idx)] = lab;
                index_of_label_[lab] = idx;
            }
        }
    }

    int order_;
    int bits_per_symbol_;
    int side_;
    std::vector<cxd> points_;
    std::vector<unsigned> labels_;
    std::vector<int> index_of_label_;
};

/// Exact Hamming and per-symbol error counts between two equal-length bit
/// streams. A symbol is in error when any of its bits_per_symbol bits differ.
inline ErrorCounts count_errors(std::span<const std::uint8_t> tx_bits,
                                std::span<const std::uint8_t> rx_bits,
                                int bits_per_symbol) {
    if (tx_bits.size() != rx_bits.size())
        throw std::invalid_argument("count_errors: length mismatch");
    if (bits_per_symbol < 1) throw std::invalid_argument("count_errors: bad symbol size");
    ErrorCounts c;
    bool symbol_hit = false;
    for (std::size_t i = 0; i < tx_bits.size(); ++i) {
        if (tx_bits[i] != rx_bits[i]) {
            ++c.bit_errors;
            symbol_hit = true;
        }
        if ((i + 1) % static_cast<std::size_t>(bits_per_symbol) == 0 || i + 1 == tx_bits.size()) {
            if (symbol_hit) ++c.symbol_errors;
            symbol_hit = false;
        }
    }
    return c;
}

}  // namespace fdrelay
