#include "dsc/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dsc {

MixingMatrix MixingMatrix::build(int b) {
    if (b < 2) throw std::invalid_argument("mixing length b must be >= 2, got " + std::to_string(b));
    if (b % 2 != 0)
        throw std::invalid_argument("mixing length b must be even, got " + std::to_string(b));
    if (b > kMaxSize)
        throw std::invalid_argument("mixing length b exceeds cap " + std::to_string(kMaxSize));

    std::vector<double> e(static_cast<std::size_t>(b) * b);
    const double inv_sqrt_b = 1.0 / std::sqrt(static_cast<double>(b));
    const double amp = std::sqrt(2.0 / b);
    const int half = b / 2;
    for (int i = 0; i < b; ++i) {
        double* row = e.data() + static_cast<std::size_t>(i) * b;
        for (int j = 0; j < b; ++j) {
            if (i == 0) {
                row[j] = inv_sqrt_b;
            } else if (i == half) {
                row[j] = (j % 2 == 0) ? inv_sqrt_b : -inv_sqrt_b;
            } else if (i < half) {
                row[j] = amp * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) * j / b);
            } else {
                row[j] =
                    amp * std::sin(2.0 * std::numbers::pi * static_cast<double>(i - half) * j / b);
            }
        }
    }
    return MixingMatrix(b, std::move(e));
}

void MixingMatrix::apply(std::span<const double> x, std::span<double> y) const {
    if (static_cast<int>(x.size()) != b_ || static_cast<int>(y.size()) != b_)
        throw std::invalid_argument("apply: vector length does not match mixing length");
    for (int i = 0; i < b_; ++i) {
        const double* row = entries_.data() + static_cast<std::size_t>(i) * b_;
        double acc = 0.0;
        for (int j = 0; j < b_; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
}

std::vector<double> MixingMatrix::apply(std::span<const double> x) const {
    std::vector<double> y(b_);
    apply(x, y);
    return y;
}

void MixingMatrix::apply_inverse(std::span<const double> y, std::span<double> x) const {
    if (static_cast<int>(y.size()) != b_ || static_cast<int>(x.size()) != b_)
        throw std::invalid_argument("apply_inverse: vector length does not match mixing length");
    std::fill(x.begin(), x.end(), 0.0);
    // accumulate column-wise: x = sum_i y_i * row_i
    for (int i = 0; i < b_; ++i) {
        const double* row = entries_.data() + static_cast<std::size_t>(i) * b_;
        const double yi = y[i];
        for (int j = 0; j < b_; ++j) x[j] += yi * row[j];
    }
}

std::vector<double> MixingMatrix::apply_inverse(std::span<const double> y) const {
    std::vector<double> x(b_);
    apply_inverse(y, x);
    return x;
}

InterleavedBlocks interleave(std::span<const double> mixed_stream, int n, int b) {
    if (n < 1 || b < 1) throw std::invalid_argument("interleave: n and b must be positive");
    if (mixed_stream.size() != static_cast<std::size_t>(n) * b)
        throw std::invalid_argument("interleave: stream length must equal n*b");
    InterleavedBlocks out;
    out.n = n;
    out.b = b;
    out.vectors.assign(b, std::vector<double>(n));
    for (int t = 0; t < n; ++t)
        for (int l = 0; l < b; ++l)
            out.vectors[l][t] = mixed_stream[static_cast<std::size_t>(t) * b + l];
    return out;
}

std::vector<double> deinterleave(const InterleavedBlocks& blocks) {
    if (blocks.b != static_cast<int>(blocks.vectors.size()))
        throw std::invalid_argument("deinterleave: malformed blocks");
    for (const auto& v : blocks.vectors)
        if (static_cast<int>(v.size()) != blocks.n)
            throw std::invalid_argument("deinterleave: malformed blocks");
    std::vector<double> stream(static_cast<std::size_t>(blocks.n) * blocks.b);
    for (int t = 0; t < blocks.n; ++t)
        for (int l = 0; l < blocks.b; ++l)
            stream[static_cast<std::size_t>(t) * blocks.b + l] = blocks.vectors[l][t];
    return stream;
}

namespace {

// limbs *= m, then += a; little-endian base 2^32
void mul_add(std::vector<std::uint32_t>& limbs, std::uint64_t m, std::uint64_t a) {
    unsigned __int128 carry = a;
    for (auto& limb : limbs) {
        unsigned __int128 acc = static_cast<unsigned __int128>(limb) * m + carry;
        limb = static_cast<std::uint32_t>(acc);
        carry = acc >> 32;
    }
    while (carry != 0) {
        limbs.push_back(static_cast<std::uint32_t>(carry));
        carry >>= 32;
    }
}

// limbs /= m, returns remainder
std::uint64_t div_mod(std::vector<std::uint32_t>& limbs, std::uint64_t m) {
    unsigned __int128 rem = 0;
    for (std::size_t i = limbs.size(); i-- > 0;) {
        unsigned __int128 cur = (rem << 32) | limbs[i];
        limbs[i] = static_cast<std::uint32_t>(cur / m);
        rem = cur % m;
    }
    while (!limbs.empty() && limbs.back() == 0) limbs.pop_back();
    return static_cast<std::uint64_t>(rem);
}

}  // namespace

PackedIndex PackedIndex::pack(std::span<const std::uint64_t> indices,
                              std::span<const std::uint64_t> radices) {
    if (indices.size() != radices.size())
        throw std::invalid_argument("pack: indices and radices differ in length");
    PackedIndex p;
    p.radices_.assign(radices.begin(), radices.end());
    for (std::size_t j = 0; j < indices.size(); ++j) {
        if (radices[j] < 1) throw std::invalid_argument("pack: radix must be >= 1");
        if (indices[j] >= radices[j])
            throw std::invalid_argument("pack: index " + std::to_string(indices[j]) +
                                        " out of range for radix " + std::to_string(radices[j]) +
                                        " at position " + std::to_string(j));
        mul_add(p.limbs_, radices[j], indices[j]);
    }
    return p;
}

std::vector<std::uint64_t> PackedIndex::unpack() const {
    std::vector<std::uint32_t> v = limbs_;
    std::vector<std::uint64_t> out(radices_.size());
    for (std::size_t j = radices_.size(); j-- > 0;) out[j] = div_mod(v, radices_[j]);
    if (!v.empty()) throw std::invalid_argument("unpack: value exceeds the radix product");
    return out;
}

std::string PackedIndex::to_decimal() const {
    if (limbs_.empty()) return "0";
    std::vector<std::uint32_t> v = limbs_;
    std::string digits;
    while (!v.empty()) digits.push_back(static_cast<char>('0' + div_mod(v, 10)));
    return {digits.rbegin(), digits.rend()};
}

}  // namespace dsc
