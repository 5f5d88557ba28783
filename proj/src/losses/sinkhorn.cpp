#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hoi/losses/mask_losses.hpp"

namespace hoi::losses {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Masses of a mask summed over square blocks of `factor` pixels.
struct Grid {
    int width = 0, height = 0;
    std::vector<double> mass;  // row-major
    std::vector<double> xs, ys;  // block centres in input pixel units
};

Grid coarsen(const render::Mask& m, int factor)
{
    Grid g;
    g.width = (m.width + factor - 1) / factor;
    g.height = (m.height + factor - 1) / factor;
    g.mass.assign(static_cast<std::size_t>(g.width) * g.height, 0.0);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            g.mass[static_cast<std::size_t>(y / factor) * g.width + x / factor] += m.at(x, y);
    for (int i = 0; i < g.width; ++i) g.xs.push_back(0.5 * (i * factor + std::min((i + 1) * factor, m.width)));
    for (int j = 0; j < g.height; ++j) g.ys.push_back(0.5 * (j * factor + std::min((j + 1) * factor, m.height)));
    return g;
}

// Inclusive index rectangle.
struct Rect {
    int x0 = 0, x1 = -1, y0 = 0, y1 = -1;
    int w() const { return x1 - x0 + 1; }
    int h() const { return y1 - y0 + 1; }
};

Rect support(const Grid& g)
{
    Rect r{g.width, -1, g.height, -1};
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x)
            if (g.mass[static_cast<std::size_t>(y) * g.width + x] > 0.0) {
                r.x0 = std::min(r.x0, x);
                r.x1 = std::max(r.x1, x);
                r.y0 = std::min(r.y0, y);
                r.y1 = std::max(r.y1, y);
            }
    return r;
}

double log_sum_exp(const double* v, const double* k, int n)
{
    double m = kNegInf;
    for (int i = 0; i < n; ++i) m = std::max(m, v[i] + k[i]);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = v[i] + k[i] - m;
        if (t > -746.0) s += std::exp(t);  // exp underflows to exactly 0 below this
    }
    return m + std::log(s);
}

// out(y, x) = LSE over (y', x') in `in` of h(y', x') - |(x, y) - (x', y')|^2 / eps,
// evaluated separably (x first, then y). `h` is laid out on `in`, `out` on `dst`.
class Convolver {
public:
    Convolver(const Grid& g, double eps) : g_(g), eps_(eps) {}

    std::vector<double> apply(const std::vector<double>& h, const Rect& in, const Rect& dst) const
    {
        const auto kx = kernel(g_.xs, in.x0, in.w(), dst.x0, dst.w());
        const auto ky = kernel(g_.ys, in.y0, in.h(), dst.y0, dst.h());
        // Pass 1: along x for every input row, stored transposed (x_out major).
        std::vector<double> tmp(static_cast<std::size_t>(dst.w()) * in.h());
        for (int r = 0; r < in.h(); ++r) {
            const double* row = &h[static_cast<std::size_t>(r) * in.w()];
            for (int c = 0; c < dst.w(); ++c)
                tmp[static_cast<std::size_t>(c) * in.h() + r] =
                    log_sum_exp(row, &kx[static_cast<std::size_t>(c) * in.w()], in.w());
        }
        // Pass 2: along y.
        std::vector<double> out(static_cast<std::size_t>(dst.w()) * dst.h());
        for (int c = 0; c < dst.w(); ++c) {
            const double* col = &tmp[static_cast<std::size_t>(c) * in.h()];
            for (int r = 0; r < dst.h(); ++r)
                out[static_cast<std::size_t>(r) * dst.w() + c] =
                    log_sum_exp(col, &ky[static_cast<std::size_t>(r) * in.h()], in.h());
        }
        return out;
    }

    void set_eps(double eps) { eps_ = eps; }
    double eps() const { return eps_; }

private:
    std::vector<double> kernel(const std::vector<double>& coord, int in0, int nin, int out0, int nout) const
    {
        std::vector<double> k(static_cast<std::size_t>(nout) * nin);
        for (int o = 0; o < nout; ++o)
            for (int i = 0; i < nin; ++i) {
                const double d = coord[out0 + o] - coord[in0 + i];
                k[static_cast<std::size_t>(o) * nin + i] = -d * d / eps_;
            }
        return k;
    }

    const Grid& g_;
    double eps_;
};

std::vector<double> crop(const std::vector<double>& full, int width, const Rect& r)
{
    std::vector<double> out(static_cast<std::size_t>(r.w()) * r.h());
    for (int y = 0; y < r.h(); ++y)
        for (int x = 0; x < r.w(); ++x)
            out[static_cast<std::size_t>(y) * r.w() + x] = full[static_cast<std::size_t>(y + r.y0) * width + x + r.x0];
    return out;
}

// Potential update: returns -eps * LSE(log mass + pot / eps - C / eps) on `dst`.
std::vector<double> update(const Convolver& conv, const std::vector<double>& log_mass,
                           const std::vector<double>& pot, const Rect& in, const Rect& dst)
{
    std::vector<double> h(log_mass.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = log_mass[i] + pot[i] / conv.eps();
    auto out = conv.apply(h, in, dst);
    for (double& v : out) v *= -conv.eps();
    return out;
}

}  // namespace

void validate(const SinkhornConfig& cfg)
{
    if (!(cfg.epsilon > 0.0)) throw InputError("SinkhornConfig: epsilon must be positive");
    if (cfg.max_iters < 1) throw InputError("SinkhornConfig: max_iters must be >= 1");
    if (!(cfg.tol > 0.0)) throw InputError("SinkhornConfig: tol must be positive");
    if (cfg.max_grid < 1) throw InputError("SinkhornConfig: max_grid must be >= 1");
}

SinkhornResult sinkhorn_loss(const render::Mask& rendered, const render::Mask& target, const SinkhornConfig& cfg)
{
    validate(cfg);
    if (!rendered.same_size(target))
        throw InputError("sinkhorn_loss: rendered is " + std::to_string(rendered.width) + "x" +
                         std::to_string(rendered.height) + " but target is " + std::to_string(target.width) +
                         "x" + std::to_string(target.height));
    const double total_a = rendered.sum(), total_b = target.sum();
    if (!(total_a > 0.0)) throw InputError("sinkhorn_loss: rendered mask has zero mass");
    if (!(total_b > 0.0)) throw InputError("sinkhorn_loss: target mask has zero mass");

    SinkhornResult res;
    const int side = std::max(rendered.width, rendered.height);
    res.grid_factor = (side + cfg.max_grid - 1) / cfg.max_grid;
    const int f = res.grid_factor;
    Grid ga = coarsen(rendered, f);
    Grid gb = coarsen(target, f);
    for (double& v : ga.mass) v /= total_a;
    for (double& v : gb.mass) v /= total_b;
    const Rect ra = support(ga), rb = support(gb);

    std::vector<double> log_a = crop(ga.mass, ga.width, ra), log_b = crop(gb.mass, gb.width, rb);
    const std::vector<double> a = log_a, b = log_b;
    for (double& v : log_a) v = v > 0.0 ? std::log(v) : kNegInf;
    for (double& v : log_b) v = v > 0.0 ? std::log(v) : kNegInf;

    const double eps = cfg.epsilon * f * f;
    const double dx = std::max(ga.xs[ra.x1] - ga.xs[rb.x0], ga.xs[rb.x1] - ga.xs[ra.x0]);
    const double dy = std::max(ga.ys[ra.y1] - ga.ys[rb.y0], ga.ys[rb.y1] - ga.ys[ra.y0]);
    const double diameter2 = dx * dx + dy * dy;

    std::vector<double> F(a.size(), 0.0), G(b.size(), 0.0);
    Convolver conv(ga, std::max(eps, diameter2));
    // Annealing: one symmetric update per halving of epsilon.
    while (conv.eps() > eps) {
        F = update(conv, log_b, G, rb, ra);
        G = update(conv, log_a, F, ra, rb);
        conv.set_eps(std::max(eps, 0.5 * conv.eps()));
    }
    for (int it = 1; it <= cfg.max_iters; ++it) {
        std::vector<double> next = update(conv, log_b, G, rb, ra);
        double err = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] > 0.0) err += a[i] * std::abs(1.0 - std::exp((F[i] - next[i]) / eps));
        F = std::move(next);
        G = update(conv, log_a, F, ra, rb);
        res.iterations = it;
        res.marginal_error = err;
        if (err < cfg.tol) {
            res.converged = true;
            break;
        }
    }

    double dual = 0.0, mean_f = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > 0.0) {
            dual += a[i] * F[i];
            mean_f += a[i] * F[i];
        }
    for (std::size_t j = 0; j < b.size(); ++j)
        if (b[j] > 0.0) dual += b[j] * G[j];
    res.cost = std::max(0.0, dual);
    res.value = std::sqrt(res.cost);

    // Potential of `rendered` on the whole grid, then chained through the
    // normalization, the block sum and the square root.
    res.grad = render::Mask(rendered.width, rendered.height);
    if (res.value > 1e-12) {
        const Rect all{0, ga.width - 1, 0, ga.height - 1};
        const std::vector<double> f_all = update(conv, log_b, G, rb, all);
        const double scale = 1.0 / (total_a * 2.0 * res.value);
        for (int y = 0; y < rendered.height; ++y)
            for (int x = 0; x < rendered.width; ++x)
                res.grad.at(x, y) =
                    (f_all[static_cast<std::size_t>(y / f) * ga.width + x / f] - mean_f) * scale;
    }
    return res;
}

}  // namespace hoi::losses
