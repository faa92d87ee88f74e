#include "fpk/feynman.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace fpk::feynman {

using chernoff::ChernoffStep;
using chernoff::StepMode;

namespace {

struct ChainContext {
    const ChernoffStep* step;
    int n = 1;
    double s = 0; // step size t/n
    int dim = 1;
    const model::Domain* dom = nullptr;
    StepMode mode = StepMode::whole_space;
    const model::JumpComponent* jump = nullptr;

    ChainContext(const ChernoffStep& st, int steps, double t) : step(&st), n(steps) {
        s = t / steps;
        dim = st.coeffs.dim;
        dom = st.domain ? &*st.domain : nullptr;
        mode = st.mode;
        jump = st.coeffs.jump ? &*st.coeffs.jump : nullptr;
    }

    Vec sample_eta(RngStream& rng) const {
        Vec z = (-s) * jump->drift_correction;
        const long k = rng.poisson(jump->rate * s);
        for (long j = 0; j < k; ++j) z += jump->sample_jump(rng);
        return z;
    }

    void advance(Vec& x, RngStream& rng) const {
        const auto& co = step->coeffs;
        Vec mean = x - s * co.drift(x);
        if (jump) mean -= sample_eta(rng);
        const SymMat a = co.diffusion(x);
        if (dim == 1) {
            x[0] = mean[0] + std::sqrt(2.0 * s * a(0, 0)) * rng.normal();
        } else {
            const Chol ch = Chol::factor(a);
            Vec u(dim);
            for (int i = 0; i < dim; ++i) u[i] = rng.normal();
            x = mean + std::sqrt(2.0 * s) * ch.apply_lower(u);
        }
    }
};

/// weight * terminal(x_n) for one chain; 0 if killed. Early exit once the
/// contribution is pinned to zero.
double chain_contribution(const ChainContext& ctx,
                          const std::function<double(const Vec&)>& terminal, Vec x,
                          RngStream& rng) {
    if (ctx.mode == StepMode::hard_kill && !ctx.dom->contains(x)) return 0;
    const auto& co = ctx.step->coeffs;
    double weight = 1.0;
    for (int k = 1; k <= ctx.n; ++k) {
        const double c = co.killing(x);
        if (c != 0) weight *= std::exp(-ctx.s * c);
        if (ctx.mode == StepMode::soft_cutoff) {
            const double cut = model::cutoff(*ctx.dom, ctx.s, x);
            if (cut <= 0) return 0;
            if (cut < 1) weight *= cut;
        }
        ctx.advance(x, rng);
        if (ctx.mode == StepMode::hard_kill && !ctx.dom->contains(x)) return 0;
    }
    return weight * terminal(x);
}

/// Paired soft/hard contributions from one common path.
void chain_contribution_paired(const ChainContext& ctx,
                               const std::function<double(const Vec&)>& f0, Vec x,
                               RngStream& rng, double& soft_out, double& hard_out) {
    const auto& co = ctx.step->coeffs;
    double kill_weight = 1.0;
    double cutoff_weight = 1.0;
    bool alive = ctx.dom->contains(x);
    for (int k = 1; k <= ctx.n; ++k) {
        const double c = co.killing(x);
        if (c != 0) kill_weight *= std::exp(-ctx.s * c);
        cutoff_weight *= model::cutoff(*ctx.dom, ctx.s, x);
        if (!alive && cutoff_weight == 0) {
            soft_out = 0;
            hard_out = 0;
            return;
        }
        ctx.advance(x, rng);
        if (alive && !ctx.dom->contains(x)) alive = false;
    }
    const double fx = f0(x);
    soft_out = kill_weight * cutoff_weight * fx;
    hard_out = alive ? kill_weight * fx : 0.0;
}

int clamp_threads(int threads) {
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    return std::max(1, std::min(threads, hw > 0 ? 4 * hw : 8));
}

/// Runs `body(point, batch, chain_lo, chain_hi)` over all (point, batch)
/// tasks on the requested number of threads; the task grid is fixed, so
/// results land in predetermined slots and reductions stay deterministic.
template <class Body>
void run_tasks(std::size_t n_points, int batches, long long samples, int threads,
               const Body& body) {
    const long long total = static_cast<long long>(n_points) * batches;
    std::atomic<long long> cursor{0};
    auto worker = [&] {
        for (;;) {
            const long long task = cursor.fetch_add(1);
            if (task >= total) return;
            const std::size_t p = static_cast<std::size_t>(task / batches);
            const int b = static_cast<int>(task % batches);
            const long long lo = samples * b / batches;
            const long long hi = samples * (b + 1) / batches;
            body(p, b, lo, hi);
        }
    };
    threads = clamp_threads(threads);
    if (threads == 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

/// Batch-means standard error from per-batch sums over ~equal batch sizes.
double batch_stderr(const std::vector<double>& batch_sums, long long samples, int batches) {
    if (batches < 2) return 0;
    double mean_of_means = 0;
    std::vector<double> means(batch_sums.size());
    for (int b = 0; b < batches; ++b) {
        const long long lo = samples * b / batches;
        const long long hi = samples * (b + 1) / batches;
        means[static_cast<std::size_t>(b)] =
            batch_sums[static_cast<std::size_t>(b)] / static_cast<double>(hi - lo);
        mean_of_means += means[static_cast<std::size_t>(b)];
    }
    mean_of_means /= batches;
    double var = 0;
    for (int b = 0; b < batches; ++b) {
        const double d = means[static_cast<std::size_t>(b)] - mean_of_means;
        var += d * d;
    }
    return std::sqrt(var / (static_cast<double>(batches) * (batches - 1)));
}

RngStream chain_stream(const MCSpec& mc, std::size_t point, long long chain) {
    const std::uint64_t idx =
        mc.antithetic ? static_cast<std::uint64_t>(chain / 2) : static_cast<std::uint64_t>(chain);
    RngStream rng(mc.seed, StreamPurpose::chain, static_cast<std::uint32_t>(point),
                  static_cast<std::uint32_t>(idx));
    if (mc.antithetic && (chain & 1)) rng.set_negate_normals(true);
    return rng;
}

}  // namespace

WeightedChain sample_chain(const ChernoffStep& step, int n, double t, const Vec& x0,
                           RngStream& rng) {
    if (n < 1) throw ValidationFailed("sample_chain needs n >= 1");
    ChainContext ctx(step, n, t);
    WeightedChain chain;
    chain.positions.reserve(static_cast<std::size_t>(n) + 1);
    chain.jumps.reserve(static_cast<std::size_t>(n));
    chain.positions.push_back(x0);
    Vec x = x0;
    if (ctx.mode == StepMode::hard_kill && !ctx.dom->contains(x)) {
        chain.alive = false;
        chain.weight = 0;
        return chain;
    }
    const auto& co = step.coeffs;
    for (int k = 1; k <= n; ++k) {
        const double c = co.killing(x);
        if (c != 0) chain.weight *= std::exp(-ctx.s * c);
        if (ctx.mode == StepMode::soft_cutoff)
            chain.weight *= model::cutoff(*ctx.dom, ctx.s, x);

        Vec mean = x - ctx.s * co.drift(x);
        Vec z = Vec::zero(ctx.dim);
        if (ctx.jump) {
            z = ctx.sample_eta(rng);
            mean -= z;
        }
        const SymMat a = co.diffusion(x);
        if (ctx.dim == 1) {
            x[0] = mean[0] + std::sqrt(2.0 * ctx.s * a(0, 0)) * rng.normal();
        } else {
            const Chol ch = Chol::factor(a);
            Vec u(ctx.dim);
            for (int i = 0; i < ctx.dim; ++i) u[i] = rng.normal();
            x = mean + std::sqrt(2.0 * ctx.s) * ch.apply_lower(u);
        }
        chain.jumps.push_back(z);
        chain.positions.push_back(x);
        if (ctx.mode == StepMode::hard_kill && !ctx.dom->contains(x)) {
            chain.alive = false;
            return chain;
        }
    }
    return chain;
}

SolutionField feynman_estimate(const ChernoffStep& step, int n, double t,
                               const model::BoundedFunction& f0, const std::vector<Vec>& points,
                               const MCSpec& mc, int threads) {
    if (n < 1) throw ValidationFailed("feynman_estimate needs n >= 1");
    if (mc.samples < 1) throw ValidationFailed("feynman_estimate needs samples >= 1");
    ChainContext ctx(step, n, t);

    // All modes evaluate f0 itself at the terminal position (killed problems
    // carry zero-extended data, so exited terminals contribute nothing); this
    // keeps the soft estimator pathwise below the hard one.
    const std::function<double(const Vec&)>& terminal = f0.f;

    const int batches = static_cast<int>(std::min<long long>(std::max(mc.batch, 1), mc.samples));
    std::vector<std::vector<double>> sums(points.size(),
                                          std::vector<double>(static_cast<std::size_t>(batches)));

    run_tasks(points.size(), batches, mc.samples, threads,
              [&](std::size_t p, int b, long long lo, long long hi) {
                  double acc = 0;
                  for (long long j = lo; j < hi; ++j) {
                      RngStream rng = chain_stream(mc, p, j);
                      acc += chain_contribution(ctx, terminal, points[p], rng);
                  }
                  sums[p][static_cast<std::size_t>(b)] = acc;
              });

    SolutionField field;
    field.dim = step.coeffs.dim;
    field.points = points;
    field.backend = "mc";
    field.n = n;
    field.samples = mc.samples;
    field.seed = mc.seed;
    field.values.reserve(points.size());
    field.std_errors.reserve(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        double total = 0;
        for (int b = 0; b < batches; ++b) total += sums[p][static_cast<std::size_t>(b)];
        field.values.push_back(total / static_cast<double>(mc.samples));
        field.std_errors.push_back(batch_stderr(sums[p], mc.samples, batches));
    }
    return field;
}

SolutionField feynman_estimate_mixed_horizon(
    const ChernoffStep& step, int n,
    const std::function<double(std::size_t, long long)>& horizon_fn,
    const model::BoundedFunction& f0, const std::vector<Vec>& points, const MCSpec& mc,
    int threads) {
    if (n < 1) throw ValidationFailed("feynman_estimate_mixed_horizon needs n >= 1");
    if (mc.samples < 1) throw ValidationFailed("feynman_estimate_mixed_horizon needs samples >= 1");

    std::function<double(const Vec&)> terminal = f0.f;
    if (step.mode == StepMode::soft_cutoff) terminal = model::extend(*step.domain, f0.f);
    const auto at_zero = [&](const Vec& x) {
        if (step.mode != StepMode::whole_space && !step.domain->contains(x)) return 0.0;
        return f0.f(x);
    };

    const int batches = static_cast<int>(std::min<long long>(std::max(mc.batch, 1), mc.samples));
    std::vector<std::vector<double>> sums(points.size(),
                                          std::vector<double>(static_cast<std::size_t>(batches)));

    run_tasks(points.size(), batches, mc.samples, threads,
              [&](std::size_t p, int b, long long lo, long long hi) {
                  double acc = 0;
                  for (long long j = lo; j < hi; ++j) {
                      const double horizon = horizon_fn(p, j);
                      if (horizon <= 0) {
                          acc += at_zero(points[p]);
                          continue;
                      }
                      ChainContext ctx(step, n, horizon);
                      RngStream rng = chain_stream(mc, p, j);
                      acc += chain_contribution(ctx, terminal, points[p], rng);
                  }
                  sums[p][static_cast<std::size_t>(b)] = acc;
              });

    SolutionField field;
    field.dim = step.coeffs.dim;
    field.points = points;
    field.backend = "mc";
    field.n = n;
    field.samples = mc.samples;
    field.seed = mc.seed;
    for (std::size_t p = 0; p < points.size(); ++p) {
        double total = 0;
        for (int b = 0; b < batches; ++b) total += sums[p][static_cast<std::size_t>(b)];
        field.values.push_back(total / static_cast<double>(mc.samples));
        field.std_errors.push_back(batch_stderr(sums[p], mc.samples, batches));
    }
    return field;
}

SoftHardReport soft_vs_hard_compare(const model::Problem& problem, int n, double t,
                                    const std::vector<Vec>& points, const MCSpec& mc,
                                    int threads) {
    if (!problem.domain) throw ValidationFailed("soft_vs_hard_compare needs a killed problem");
    ChernoffStep soft_step(problem.coeffs, problem.domain, StepMode::soft_cutoff);
    ChainContext ctx(soft_step, n, t);

    const auto f0 = problem.initial.f;

    const int batches = static_cast<int>(std::min<long long>(std::max(mc.batch, 1), mc.samples));
    struct Sums {
        double soft = 0, hard = 0, gap = 0;
    };
    std::vector<std::vector<Sums>> sums(points.size(),
                                        std::vector<Sums>(static_cast<std::size_t>(batches)));

    run_tasks(points.size(), batches, mc.samples, threads,
              [&](std::size_t p, int b, long long lo, long long hi) {
                  Sums acc;
                  for (long long j = lo; j < hi; ++j) {
                      RngStream rng = chain_stream(mc, p, j);
                      double sv = 0, hv = 0;
                      chain_contribution_paired(ctx, f0, points[p], rng, sv, hv);
                      acc.soft += sv;
                      acc.hard += hv;
                      acc.gap += sv - hv;
                  }
                  sums[p][static_cast<std::size_t>(b)] = acc;
              });

    SoftHardReport rep;
    auto init_field = [&](SolutionField& f) {
        f.dim = problem.coeffs.dim;
        f.points = points;
        f.backend = "mc";
        f.n = n;
        f.samples = mc.samples;
        f.seed = mc.seed;
    };
    init_field(rep.soft);
    init_field(rep.hard);
    for (std::size_t p = 0; p < points.size(); ++p) {
        std::vector<double> soft_sums(static_cast<std::size_t>(batches));
        std::vector<double> hard_sums(static_cast<std::size_t>(batches));
        std::vector<double> gap_sums(static_cast<std::size_t>(batches));
        double soft_total = 0, hard_total = 0, gap_total = 0;
        for (int b = 0; b < batches; ++b) {
            const auto& s = sums[p][static_cast<std::size_t>(b)];
            soft_sums[static_cast<std::size_t>(b)] = s.soft;
            hard_sums[static_cast<std::size_t>(b)] = s.hard;
            gap_sums[static_cast<std::size_t>(b)] = s.gap;
            soft_total += s.soft;
            hard_total += s.hard;
            gap_total += s.gap;
        }
        const double inv = 1.0 / static_cast<double>(mc.samples);
        rep.soft.values.push_back(soft_total * inv);
        rep.soft.std_errors.push_back(batch_stderr(soft_sums, mc.samples, batches));
        rep.hard.values.push_back(hard_total * inv);
        rep.hard.std_errors.push_back(batch_stderr(hard_sums, mc.samples, batches));
        rep.gap.push_back(gap_total * inv);
        rep.gap_stderr.push_back(batch_stderr(gap_sums, mc.samples, batches));
    }
    return rep;
}

}  // namespace fpk::feynman
