#include "ospde/noise.hpp"

#include <cmath>
#include <random>

#include "ospde/errors.hpp"
#include "ospde/io.hpp"
#include "ospde/random.hpp"

namespace ospde {

double BackwardNoisePath::value(std::size_t k, std::size_t c) const {
    double b = 0.0;
    for (std::size_t j = 0; j < k; ++j) b += increments[j * d1 + c];
    return b;
}

BackwardNoisePath sample_backward_noise(std::uint64_t seed, std::size_t nt, std::size_t d1, double dt) {
    if (nt < 1) throw DomainError("sample_backward_noise: nt must be >= 1");
    if (d1 < 1) throw DomainError("sample_backward_noise: d1 must be >= 1");
    if (!(dt > 0.0)) throw DomainError("sample_backward_noise: dt must be > 0");
    BackwardNoisePath p{seed, nt, d1, dt, std::vector<double>(nt * d1)};
    auto rng = make_stream(seed, StreamTag::backward_noise, 0);
    std::normal_distribution<double> gauss(0.0, std::sqrt(dt));
    for (double& x : p.increments) x = gauss(rng);
    return p;
}

ForwardPathBatch::ForwardPathBatch(std::uint64_t seed, std::size_t paths, const SpaceTimeGrid& grid)
    : seed_(seed), paths_(paths), nt_(grid.time_steps()), dt_(grid.dt()), dim_(grid.dim()), core_(grid.core()) {
    if (paths_ < 2) throw DomainError("forward paths: need at least 2 paths");
}

ForwardPath ForwardPathBatch::path(std::size_t m) const {
    if (m >= paths_) throw ShapeError("forward paths: index out of range");
    ForwardPath p;
    p.index = m;
    p.dim = dim_;
    p.positions.resize((nt_ + 1) * dim_);
    p.increments.resize(nt_ * dim_);
    auto rng = make_stream(seed_, StreamTag::forward_path, m);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, std::sqrt(dt_));
    for (int a = 0; a < dim_; ++a) p.positions[a] = core_.lower[a] + unit(rng) * (core_.upper[a] - core_.lower[a]);
    for (std::size_t k = 0; k < nt_; ++k) {
        for (int a = 0; a < dim_; ++a) {
            const double dw = gauss(rng);
            p.increments[k * dim_ + a] = dw;
            p.positions[(k + 1) * dim_ + a] = p.positions[k * dim_ + a] + dw;
        }
    }
    return p;
}

namespace {

std::size_t steps_of(std::span<const double> values, std::span<const double> increments, std::size_t width,
                     const char* what) {
    if (width == 0) throw ShapeError(std::string(what) + ": width must be >= 1");
    if (increments.size() % width != 0) throw ShapeError(std::string(what) + ": increments not a multiple of width");
    const std::size_t nt = increments.size() / width;
    if (values.size() != (nt + 1) * width) {
        throw ShapeError(std::string(what) + ": expected " + std::to_string((nt + 1) * width) + " values for " +
                         std::to_string(nt) + " increments, got " + std::to_string(values.size()));
    }
    return nt;
}

}  // namespace

double forward_ito_integral(std::span<const double> values, std::span<const double> inc, std::size_t width) {
    const std::size_t nt = steps_of(values, inc, width, "forward_ito_integral");
    double s = 0.0;
    for (std::size_t k = 0; k < nt; ++k) {
        for (std::size_t c = 0; c < width; ++c) s += values[k * width + c] * inc[k * width + c];
    }
    return s;
}

double backward_ito_integral(std::span<const double> values, std::span<const double> inc, std::size_t width) {
    const std::size_t nt = steps_of(values, inc, width, "backward_ito_integral");
    double s = 0.0;
    for (std::size_t k = 0; k < nt; ++k) {
        for (std::size_t c = 0; c < width; ++c) s += values[(k + 1) * width + c] * inc[k * width + c];
    }
    return s;
}

double symmetric_integral(std::span<const double> values, std::span<const double> inc, std::size_t width) {
    steps_of(values, inc, width, "symmetric_integral");
    return forward_ito_integral(values, inc, width) + backward_ito_integral(values, inc, width);
}

void write_paths_csv(std::ostream& out, const ForwardPathBatch& batch, std::span<const std::size_t> indices,
                     const BackwardNoisePath& noise, double dt) {
    if (noise.nt != batch.time_steps()) throw ShapeError("write_paths_csv: noise and paths differ in length");
    out << "path,k,t";
    for (int a = 0; a < batch.dim(); ++a) out << ",W" << a;
    for (std::size_t c = 0; c < noise.d1; ++c) out << ",B" << c;
    out << '\n';
    for (std::size_t m : indices) {
        const ForwardPath p = batch.path(m);
        std::vector<double> b(noise.d1, 0.0);
        for (std::size_t k = 0; k <= batch.time_steps(); ++k) {
            if (k > 0) {
                for (std::size_t c = 0; c < noise.d1; ++c) b[c] += noise.increments[(k - 1) * noise.d1 + c];
            }
            out << m << ',' << k << ',' << format_number(dt * static_cast<double>(k));
            for (int a = 0; a < batch.dim(); ++a) out << ',' << format_number(p.positions[k * batch.dim() + a]);
            for (double v : b) out << ',' << format_number(v);
            out << '\n';
        }
    }
}

}  // namespace ospde
