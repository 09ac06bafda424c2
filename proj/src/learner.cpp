#include "synlearn/learner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "synlearn/rng.hpp"

namespace synlearn {

SyndromeClassPartition partition_classes(const std::vector<PauliOperator>& generators,
                                         const NoiseModel& model) {
    if (symplectic_rank(generators) != generators.size())
        throw std::invalid_argument("generators are dependent");
    SyndromeClassPartition part;
    part.num_generators = generators.size();
    part.class_of_error.assign(model.num_errors(), -1);
    std::map<Gf2Vector, std::vector<std::size_t>> by_syndrome;
    for (std::size_t e = 0; e < model.num_errors(); ++e) {
        Gf2Vector syn(generators.size());
        const PauliOperator& pauli = model.error_pauli(e);
        for (std::size_t g = 0; g < generators.size(); ++g)
            if (binary_commutator(pauli, generators[g])) syn.set(g, true);
        by_syndrome[syn].push_back(e);
    }
    for (auto& [syn, members] : by_syndrome) {
        if (syn.is_zero()) {
            part.trivial_class = members;
            continue;
        }
        for (std::size_t e : members)
            part.class_of_error[e] = static_cast<std::ptrdiff_t>(part.classes.size());
        part.syndromes.push_back(syn);
        part.classes.push_back(members);
    }
    return part;
}

namespace {

std::size_t real_rank(std::vector<std::vector<double>> m) {
    const double tol = 1e-8;
    std::size_t rank = 0;
    if (m.empty()) return 0;
    std::size_t cols = m[0].size();
    for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
        std::size_t pivot = rank;
        for (std::size_t r = rank + 1; r < m.size(); ++r)
            if (std::abs(m[r][c]) > std::abs(m[pivot][c])) pivot = r;
        if (std::abs(m[pivot][c]) < tol) continue;
        std::swap(m[rank], m[pivot]);
        for (std::size_t r = 0; r < m.size(); ++r) {
            if (r == rank || std::abs(m[r][c]) < tol * 1e-4) continue;
            double f = m[r][c] / m[rank][c];
            for (std::size_t k = c; k < cols; ++k) m[r][k] -= f * m[rank][k];
        }
        ++rank;
    }
    return rank;
}

Gf2Vector dp_row_for_subset(const Gf2Vector& subset, const SyndromeClassPartition& part) {
    Gf2Vector row(part.num_classes());
    for (std::size_t c = 0; c < part.num_classes(); ++c) {
        int bit = 0;
        // parity of |subset ∩ J(C)|
        const Gf2Vector& syn = part.syndromes[c];
        for (std::size_t g = 0; g < part.num_generators; ++g)
            if (subset.get(g) && syn.get(g)) bit ^= 1;
        if (bit) row.set(c, true);
    }
    return row;
}

PauliOperator product_for_subset(const Gf2Vector& subset, const std::vector<PauliOperator>& gens) {
    PauliOperator op(gens.empty() ? 0 : gens[0].num_qubits());
    for (std::size_t g = 0; g < gens.size(); ++g)
        if (subset.get(g)) op *= gens[g];
    return op;
}

// Incremental real-rank tracker via Gram-Schmidt, reorthogonalizing when a
// projection pass cancels most of the vector.
struct RealRankTracker {
    std::vector<std::vector<double>> basis;
    double tol = 1e-7;

    bool add(std::vector<double> v) {
        double initial = 0;
        for (double x : v) initial += x * x;
        initial = std::sqrt(initial);
        double norm = project(v);
        if (norm < 0.7 * initial && norm >= tol) norm = project(v);
        if (norm < tol) return false;
        for (auto& x : v) x /= norm;
        basis.push_back(std::move(v));
        return true;
    }

  private:
    double project(std::vector<double>& v) const {
        for (const auto& b : basis) {
            double dot = 0;
            for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * b[i];
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dot * b[i];
        }
        double norm = 0;
        for (double x : v) norm += x * x;
        return std::sqrt(norm);
    }
};

std::vector<double> as_double(const Gf2Vector& v) {
    std::vector<double> out(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v.get(i)) out[i] = 1.0;
    return out;
}

void append_row(LearningProblem& problem, const Gf2Vector& subset, const NoiseModel& model) {
    StabilizerRow row;
    row.gen_subset = subset;
    row.op = product_for_subset(subset, problem.generators);
    Gf2Vector d(model.num_errors());
    std::vector<std::size_t> a_cols;
    for (std::size_t e = 0; e < model.num_errors(); ++e) {
        const auto& err = model.errors()[e];
        const auto& support = model.channel(err.channel_id).support;
        LocalPauliIndex restricted = restrict_to(row.op, support);
        if (restricted == err.local_rank) a_cols.push_back(e);
        if (binary_commutator(row.op, model.error_pauli(e))) d.set(e, true);
    }
    problem.dp_rows.push_back(dp_row_for_subset(subset, problem.partition));
    problem.d_rows.push_back(std::move(d));
    problem.a_cols.push_back(std::move(a_cols));
    problem.rows.push_back(std::move(row));
}

void init_blocks(LearningProblem& problem, const NoiseModel& model) {
    std::size_t flat = 0;
    for (std::size_t id = 0; id < model.channels().size(); ++id) {
        LearningProblem::ChannelBlock blk;
        blk.first = flat;
        blk.count = model.channel(id).probs.size() - 1;
        if (blk.count > 32)
            throw std::invalid_argument("channel too large for the dense nonlinear solver");
        blk.anticommute.assign(blk.count, 0);
        for (std::size_t a = 0; a < blk.count; ++a)
            for (std::size_t b = 0; b < blk.count; ++b)
                if (binary_commutator(model.error_pauli(blk.first + a), model.error_pauli(blk.first + b)))
                    blk.anticommute[a] |= (1u << b);
        flat += blk.count;
        problem.blocks.push_back(std::move(blk));
    }
}

}  // namespace

std::size_t LearningProblem::rank_a() const {
    std::vector<std::vector<double>> m;
    for (const auto& cols : a_cols) {
        std::vector<double> row(num_errors(), 0.0);
        for (std::size_t e : cols) row[e] = 1.0;
        m.push_back(std::move(row));
    }
    return real_rank(std::move(m));
}

std::size_t LearningProblem::rank_dp() const {
    std::vector<std::vector<double>> m;
    for (const auto& row : dp_rows) m.push_back(as_double(row));
    return real_rank(std::move(m));
}

std::size_t LearningProblem::rank_d_gf2() const {
    Gf2Matrix m(num_errors());
    for (const auto& row : d_rows) m.append_row(row);
    return m.rank();
}

LearningProblem minimal_subset(const std::vector<PauliOperator>& generators, const NoiseModel& model,
                               std::size_t max_order) {
    LearningProblem problem;
    problem.generators = generators;
    problem.partition = partition_classes(generators, model);
    init_blocks(problem, model);
    const std::size_t g = generators.size();
    const std::size_t target = problem.partition.num_classes();

    // Stabilizer correlation graph: generators sharing a channel support.
    std::vector<std::set<std::size_t>> adj(g);
    for (const auto& ch : model.channels()) {
        std::vector<std::size_t> touching;
        for (std::size_t i = 0; i < g; ++i) {
            bool overlaps = false;
            for (std::size_t q : ch.support.qubits)
                if (generators[i].x(q) || generators[i].z(q)) overlaps = true;
            if (overlaps) touching.push_back(i);
        }
        for (std::size_t a : touching)
            for (std::size_t b : touching)
                if (a != b) adj[a].insert(b);
    }

    RealRankTracker tracker;
    std::vector<std::vector<std::size_t>> frontier;  // connected subgraphs of the current order
    std::set<std::vector<std::size_t>> seen;
    std::size_t order = 0;
    while (tracker.basis.size() < target) {
        ++order;
        if (order > max_order || order > g)
            throw std::runtime_error("rank target unreachable with connected products");
        std::vector<std::vector<std::size_t>> next;
        if (order == 1) {
            for (std::size_t v = 0; v < g; ++v) next.push_back({v});
        } else {
            for (const auto& sub : frontier) {
                std::set<std::size_t> candidates;
                for (std::size_t v : sub)
                    for (std::size_t w : adj[v])
                        if (!std::binary_search(sub.begin(), sub.end(), w)) candidates.insert(w);
                for (std::size_t w : candidates) {
                    std::vector<std::size_t> grown(sub);
                    grown.insert(std::lower_bound(grown.begin(), grown.end(), w), w);
                    if (seen.insert(grown).second) next.push_back(grown);
                }
            }
        }
        std::sort(next.begin(), next.end());
        for (const auto& sub : next) {
            if (tracker.basis.size() >= target) break;
            Gf2Vector subset(g);
            for (std::size_t v : sub) subset.set(v, true);
            Gf2Vector dp = dp_row_for_subset(subset, problem.partition);
            if (tracker.add(as_double(dp))) append_row(problem, subset, model);
        }
        frontier = std::move(next);
    }
    return problem;
}

LearningProblem analytic_subset(const std::vector<PauliOperator>& generators, const NoiseModel& model) {
    LearningProblem problem;
    problem.generators = generators;
    problem.partition = partition_classes(generators, model);
    init_blocks(problem, model);
    std::set<Gf2Vector> subsets;
    for (const auto& syn : problem.partition.syndromes) {
        auto ones = syn.ones();
        if (ones.size() > 20) throw std::invalid_argument("class violates too many generators");
        for (std::size_t mask = 1; mask < (std::size_t{1} << ones.size()); ++mask) {
            Gf2Vector subset(generators.size());
            for (std::size_t b = 0; b < ones.size(); ++b)
                if ((mask >> b) & 1) subset.set(ones[b], true);
            subsets.insert(subset);
        }
    }
    for (const auto& subset : subsets) append_row(problem, subset, model);
    return problem;
}

LearningProblem problem_for_rows(const std::vector<PauliOperator>& generators, const NoiseModel& model,
                                 const std::vector<Gf2Vector>& gen_subsets) {
    LearningProblem problem;
    problem.generators = generators;
    problem.partition = partition_classes(generators, model);
    init_blocks(problem, model);
    for (const auto& subset : gen_subsets) append_row(problem, subset, model);
    return problem;
}

std::vector<std::vector<double>> build_constraints(const SyndromeClassPartition& partition,
                                                   const std::vector<double>& r,
                                                   const ConstraintOptions& options) {
    const std::size_t n_err = partition.class_of_error.size();
    if (r.size() != n_err) throw std::invalid_argument("relative-strength vector has wrong length");
    for (double v : r)
        if (v <= 0) throw std::invalid_argument("relative strengths must be positive");
    std::vector<std::vector<double>> b;
    if (options.class_ratio) {
        for (std::size_t c = 0; c < partition.num_classes(); ++c) {
            std::size_t rep = partition.representative(c);
            for (std::size_t e : partition.classes[c]) {
                if (e == rep) continue;
                std::vector<double> row(n_err, 0.0);
                row[rep] = 1.0;
                row[e] = -r[rep] / r[e];
                b.push_back(std::move(row));
            }
        }
    }
    if (options.trivial_average && !partition.trivial_class.empty()) {
        std::vector<bool> trivial(n_err, false);
        for (std::size_t e : partition.trivial_class) trivial[e] = true;
        double detectable = static_cast<double>(n_err - partition.trivial_class.size());
        for (std::size_t e0 : partition.trivial_class) {
            std::vector<double> row(n_err, 0.0);
            row[e0] = 1.0;
            for (std::size_t e = 0; e < n_err; ++e)
                if (!trivial[e]) row[e] = -r[e0] / (detectable * r[e]);
            b.push_back(std::move(row));
        }
    }
    for (std::size_t k = 0; k < options.uniformity_rows; ++k) {
        std::size_t target = counter_hash(options.seed, 0x756e6966ull, k) % n_err;
        std::vector<double> row(n_err, 0.0);
        row[target] = 1.0;
        for (std::size_t e = 0; e < n_err; ++e)
            if (e != target) row[e] = -r[target] / (static_cast<double>(n_err - 2) * r[e]);
        b.push_back(std::move(row));
    }
    return b;
}

std::vector<double> split_class_rates(const SyndromeClassPartition& partition,
                                      const std::vector<double>& r,
                                      const std::vector<double>& class_rates) {
    const std::size_t n_err = partition.class_of_error.size();
    std::vector<double> p(n_err, 0.0);
    for (std::size_t c = 0; c < partition.num_classes(); ++c) {
        double total_strength = 0.0;
        for (std::size_t e : partition.classes[c]) total_strength += r[e];
        for (std::size_t e : partition.classes[c]) p[e] = class_rates[c] * r[e] / total_strength;
    }
    if (!partition.trivial_class.empty()) {
        double detectable = static_cast<double>(n_err - partition.trivial_class.size());
        double weighted = 0.0;
        for (std::size_t e = 0; e < n_err; ++e)
            if (partition.class_of_error[e] >= 0) weighted += p[e] / r[e];
        for (std::size_t e0 : partition.trivial_class) p[e0] = r[e0] * weighted / detectable;
    }
    return p;
}

std::vector<double> recursive_solve(const LearningProblem& problem,
                                    const std::vector<double>& expectations) {
    if (expectations.size() != problem.num_rows())
        throw std::invalid_argument("expectation count mismatch");
    std::map<Gf2Vector, double> y;  // gen subset -> log Lambda
    for (std::size_t i = 0; i < problem.num_rows(); ++i) {
        if (expectations[i] <= 0.0)
            throw std::domain_error("nonpositive empirical expectation; more samples required");
        y[problem.rows[i].gen_subset] = std::log(expectations[i]);
    }
    const auto& part = problem.partition;
    const std::size_t g = part.num_generators;
    std::vector<std::size_t> order(part.num_classes());
    for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
    std::stable_sort(order.begin(), order.end(), [&part](std::size_t a, std::size_t b) {
        return part.syndromes[a].popcount() > part.syndromes[b].popcount();
    });
    std::vector<double> log_nu(part.num_classes(), 0.0);
    std::vector<char> solved(part.num_classes(), 0);
    for (std::size_t c : order) {
        const Gf2Vector& j = part.syndromes[c];
        auto ones = j.ones();
        double acc = 0.0;
        // Sum over strict supersets J(C') of J(C); larger popcounts were
        // solved first.
        for (std::size_t c2 = 0; c2 < part.num_classes(); ++c2) {
            if (c2 == c) continue;
            const Gf2Vector& j2 = part.syndromes[c2];
            if (j2.popcount() <= j.popcount()) continue;
            bool superset = true;
            for (std::size_t b : ones)
                if (!j2.get(b)) superset = false;
            if (!superset) continue;
            if (!solved[c2]) throw std::logic_error("recursion order violated");
            acc -= log_nu[c2];
        }
        double scale = std::ldexp(1.0, 1 - static_cast<int>(ones.size()));
        double sum = 0.0;
        for (std::size_t mask = 1; mask < (std::size_t{1} << ones.size()); ++mask) {
            Gf2Vector subset(g);
            int bits = 0;
            for (std::size_t b = 0; b < ones.size(); ++b)
                if ((mask >> b) & 1) {
                    subset.set(ones[b], true);
                    ++bits;
                }
            auto it = y.find(subset);
            if (it == y.end()) throw std::invalid_argument("expectations missing a required sub-product");
            sum += ((bits % 2) ? 1.0 : -1.0) * it->second;
        }
        log_nu[c] = acc + scale * sum;
        solved[c] = 1;
    }
    return log_nu;
}

namespace {

// Bounded least squares  min |y - Dp x|^2  s.t. x <= 0, by a Cholesky solve
// followed by projected-gradient refinement when the bound is active.
std::vector<double> bounded_lsq_log_nu(const std::vector<Gf2Vector>& dp_rows,
                                       const std::vector<double>& y, std::size_t classes,
                                       std::size_t max_iters, double tol, std::size_t* iters_out) {
    const std::size_t m = dp_rows.size();
    std::vector<std::vector<double>> gram(classes, std::vector<double>(classes, 0.0));
    std::vector<double> rhs(classes, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        auto ones = dp_rows[r].ones();
        for (std::size_t a : ones) {
            rhs[a] += y[r];
            for (std::size_t b : ones) gram[a][b] += 1.0;
        }
    }
    // Cholesky of the (positive definite, by full column rank) Gram matrix.
    std::vector<std::vector<double>> chol(gram);
    bool ok = true;
    for (std::size_t i = 0; i < classes && ok; ++i) {
        for (std::size_t j = i; j < classes; ++j) {
            double sum = chol[j][i];
            for (std::size_t k = 0; k < i; ++k) sum -= chol[i][k] * chol[j][k];
            if (i == j) {
                if (sum <= 1e-12) {
                    ok = false;
                    break;
                }
                chol[i][i] = std::sqrt(sum);
            } else {
                chol[j][i] = sum / chol[i][i];
            }
        }
    }
    std::vector<double> x(classes, 0.0);
    if (ok) {
        std::vector<double> z(classes, 0.0);
        for (std::size_t i = 0; i < classes; ++i) {
            double sum = rhs[i];
            for (std::size_t k = 0; k < i; ++k) sum -= chol[i][k] * z[k];
            z[i] = sum / chol[i][i];
        }
        for (std::size_t i = classes; i-- > 0;) {
            double sum = z[i];
            for (std::size_t k = i + 1; k < classes; ++k) sum -= chol[k][i] * x[k];
            x[i] = sum / chol[i][i];
        }
    }
    bool feasible = true;
    for (double v : x)
        if (v > 0) feasible = false;
    std::size_t iters = 0;
    if (!feasible || !ok) {
        // Projected gradient on f(x) = |y - Dp x|^2 with x <= 0.
        for (auto& v : x) v = std::min(v, 0.0);
        double step = 1.0 / (1.0 + static_cast<double>(m));
        std::vector<double> grad(classes), resid(m);
        double prev = 1e300;
        for (iters = 0; iters < max_iters; ++iters) {
            for (std::size_t r = 0; r < m; ++r) {
                double dot = 0;
                for (std::size_t c : dp_rows[r].ones()) dot += x[c];
                resid[r] = y[r] - dot;
            }
            double f = 0;
            for (double v : resid) f += v * v;
            if (prev - f < tol && iters > 3) break;
            prev = f;
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c : dp_rows[r].ones()) grad[c] -= 2 * resid[r];
            for (std::size_t c = 0; c < classes; ++c) x[c] = std::min(0.0, x[c] - step * grad[c]);
        }
    }
    if (iters_out) *iters_out = iters;
    return x;
}

// lambda_k = 1 - 2 * sum_{e in channel, <O_k,e>=1} p_e, flat order.
void channel_lambdas(const LearningProblem& problem, const std::vector<double>& p,
                     std::vector<double>& lambda) {
    lambda.assign(p.size(), 1.0);
    for (const auto& blk : problem.blocks) {
        for (std::size_t a = 0; a < blk.count; ++a) {
            double acc = 0.0;
            std::uint32_t mask = blk.anticommute[a];
            while (mask) {
                unsigned b = static_cast<unsigned>(__builtin_ctz(mask));
                mask &= mask - 1;
                acc += p[blk.first + b];
            }
            lambda[blk.first + a] = 1.0 - 2.0 * acc;
        }
    }
}

}  // namespace

LearnedRates optimize(const LearningProblem& problem, const std::vector<double>& expectations,
                      const std::vector<double>& relative_strength, const ConstraintOptions& constraints,
                      const OptimizeOptions& options) {
    if (expectations.size() != problem.num_rows())
        throw std::invalid_argument("expectation count mismatch");
    const auto& part = problem.partition;
    const std::size_t classes = part.num_classes();

    LearnedRates out;
    out.diagnostics.converged = true;

    // Drop rows whose empirical expectation is nonpositive (possible at small
    // N) and re-verify the rank.
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < expectations.size(); ++i) {
        if (expectations[i] > 0.0)
            keep.push_back(i);
        else if (!options.drop_nonpositive_rows)
            throw std::domain_error("nonpositive empirical expectation");
    }
    out.diagnostics.dropped_rows = expectations.size() - keep.size();
    std::vector<Gf2Vector> dp_rows;
    std::vector<double> y;
    for (std::size_t i : keep) {
        dp_rows.push_back(problem.dp_rows[i]);
        y.push_back(std::log(expectations[i]));
    }
    if (out.diagnostics.dropped_rows > 0) {
        std::vector<std::vector<double>> m;
        for (const auto& row : dp_rows) m.push_back(as_double(row));
        if (real_rank(std::move(m)) < classes)
            throw std::runtime_error("rank fell below |C*| after dropping rows; increase the sample size");
    }

    if (options.solver == SolverKind::Recursive) {
        out.log_nu = recursive_solve(problem, expectations);
        out.diagnostics.solver = "recursive";
    } else if (options.solver == SolverKind::LinearLsq) {
        std::size_t iters = 0;
        out.log_nu = bounded_lsq_log_nu(dp_rows, y, classes, options.max_iterations,
                                        options.objective_tolerance, &iters);
        out.diagnostics.solver = "linear_lsq";
        out.diagnostics.iterations = iters;
    } else {
        out.diagnostics.solver = "nonlinear";
    }

    std::vector<double> p_hat;
    if (options.solver != SolverKind::Nonlinear) {
        std::vector<double> class_rates(classes);
        for (std::size_t c = 0; c < classes; ++c) class_rates[c] = -0.5 * out.log_nu[c];
        p_hat = split_class_rates(part, relative_strength, class_rates);
    } else {
        // Projected gradient on |log L - A log lambda(p)|^2 + w |B p|^2, p >= 0,
        // warm-started from the linearized class split.
        // Structured constraint penalty: class-ratio rows are 2-sparse, the
        // trivial-average and uniformity rows share rank-one weighted sums.
        const std::size_t n_err_c = problem.num_errors();
        struct PairRow {
            std::size_t rep, other;
            double coeff;
        };
        std::vector<PairRow> pair_rows;
        if (constraints.class_ratio) {
            for (std::size_t c = 0; c < part.num_classes(); ++c) {
                std::size_t rep = part.representative(c);
                for (std::size_t e : part.classes[c])
                    if (e != rep)
                        pair_rows.push_back({rep, e, -relative_strength[rep] / relative_strength[e]});
            }
        }
        std::vector<std::size_t> trivial_rows;
        std::vector<bool> is_trivial(n_err_c, false);
        if (constraints.trivial_average) {
            trivial_rows = part.trivial_class;
            for (std::size_t e : trivial_rows) is_trivial[e] = true;
        }
        const double detectable =
            static_cast<double>(n_err_c - part.trivial_class.size());
        std::vector<std::size_t> uniformity_rows;
        for (std::size_t k = 0; k < constraints.uniformity_rows; ++k)
            uniformity_rows.push_back(counter_hash(constraints.seed, 0x756e6966ull, k) % n_err_c);
        const double unif_denom = static_cast<double>(n_err_c - 2);
        std::size_t iters0 = 0;
        std::vector<double> lin =
            bounded_lsq_log_nu(dp_rows, y, classes, options.max_iterations, options.objective_tolerance,
                               &iters0);
        std::vector<double> class_rates(classes);
        for (std::size_t c = 0; c < classes; ++c) class_rates[c] = -0.5 * lin[c];
        p_hat = split_class_rates(part, relative_strength, class_rates);
        for (auto& v : p_hat) v = std::max(v, 0.0);
        // Keep the start interior: every channel needs total rate < 1/2 for
        // positive eigenvalues.
        for (const auto& blk : problem.blocks) {
            double total = 0.0;
            for (std::size_t a = 0; a < blk.count; ++a) total += p_hat[blk.first + a];
            if (total > 0.4) {
                double scale = 0.4 / total;
                for (std::size_t a = 0; a < blk.count; ++a) p_hat[blk.first + a] *= scale;
            }
        }

        const std::size_t n_err = problem.num_errors();
        std::vector<double> lambda, grad(n_err), resid(keep.size());
        std::vector<double> pair_vals(pair_rows.size()), triv_vals(trivial_rows.size()),
            unif_vals(uniformity_rows.size());
        const double w = options.constraint_weight;
        auto objective = [&](const std::vector<double>& p) {
            channel_lambdas(problem, p, lambda);
            for (double l : lambda)
                if (l <= 0.0) return 1e300;  // infeasible trial point
            double f = 0.0;
            for (std::size_t r = 0; r < keep.size(); ++r) {
                double dot = 0.0;
                for (std::size_t e : problem.a_cols[keep[r]]) dot += std::log(lambda[e]);
                resid[r] = y[r] - dot;
                f += resid[r] * resid[r];
            }
            for (std::size_t i = 0; i < pair_rows.size(); ++i) {
                double v = p[pair_rows[i].rep] + pair_rows[i].coeff * p[pair_rows[i].other];
                pair_vals[i] = v;
                f += w * v * v;
            }
            if (!trivial_rows.empty()) {
                double weighted = 0.0;
                for (std::size_t e = 0; e < n_err; ++e)
                    if (!is_trivial[e]) weighted += p[e] / relative_strength[e];
                for (std::size_t i = 0; i < trivial_rows.size(); ++i) {
                    std::size_t e0 = trivial_rows[i];
                    double v = p[e0] - relative_strength[e0] * weighted / detectable;
                    triv_vals[i] = v;
                    f += w * v * v;
                }
            }
            if (!uniformity_rows.empty()) {
                double total = 0.0;
                for (std::size_t e = 0; e < n_err; ++e) total += p[e] / relative_strength[e];
                for (std::size_t i = 0; i < uniformity_rows.size(); ++i) {
                    std::size_t k = uniformity_rows[i];
                    double v = p[k] - relative_strength[k] * (total - p[k] / relative_strength[k]) /
                                          unif_denom;
                    unif_vals[i] = v;
                    f += w * v * v;
                }
            }
            return f;
        };
        auto gradient = [&](const std::vector<double>& p) {
            (void)p;
            std::fill(grad.begin(), grad.end(), 0.0);
            // d/d lambda_k accumulated over rows, then chain through
            // lambda_k = 1 - 2 sum_{<k,e>} p_e.
            std::vector<double> dl(n_err, 0.0);
            for (std::size_t r = 0; r < keep.size(); ++r)
                for (std::size_t e : problem.a_cols[keep[r]]) dl[e] += -2.0 * resid[r] / lambda[e];
            for (const auto& blk : problem.blocks) {
                for (std::size_t a = 0; a < blk.count; ++a) {
                    double v = dl[blk.first + a];
                    if (v == 0.0) continue;
                    std::uint32_t mask = blk.anticommute[a];
                    while (mask) {
                        unsigned b = static_cast<unsigned>(__builtin_ctz(mask));
                        mask &= mask - 1;
                        grad[blk.first + b] += -2.0 * v;
                    }
                }
            }
            for (std::size_t i = 0; i < pair_rows.size(); ++i) {
                double g = 2.0 * w * pair_vals[i];
                grad[pair_rows[i].rep] += g;
                grad[pair_rows[i].other] += g * pair_rows[i].coeff;
            }
            if (!trivial_rows.empty()) {
                double acc = 0.0;
                for (std::size_t i = 0; i < trivial_rows.size(); ++i) {
                    grad[trivial_rows[i]] += 2.0 * w * triv_vals[i];
                    acc += triv_vals[i] * relative_strength[trivial_rows[i]];
                }
                double common = 2.0 * w * acc / detectable;
                for (std::size_t e = 0; e < n_err; ++e)
                    if (!is_trivial[e]) grad[e] -= common / relative_strength[e];
            }
            if (!uniformity_rows.empty()) {
                double acc = 0.0;
                for (std::size_t i = 0; i < uniformity_rows.size(); ++i)
                    acc += unif_vals[i] * relative_strength[uniformity_rows[i]];
                double common = 2.0 * w * acc / unif_denom;
                for (std::size_t e = 0; e < n_err; ++e) grad[e] -= common / relative_strength[e];
                for (std::size_t i = 0; i < uniformity_rows.size(); ++i) {
                    std::size_t k = uniformity_rows[i];
                    // Direct term plus the self-entry excluded from the sum.
                    grad[k] += 2.0 * w * unif_vals[i] +
                               2.0 * w * unif_vals[i] * relative_strength[k] /
                                   (unif_denom * relative_strength[k]);
                }
            }
        };

        double f = objective(p_hat);
        double step = 1e-2;
        std::size_t iter = 0;
        std::size_t budget = options.fixed_iterations >= 0
                                 ? static_cast<std::size_t>(options.fixed_iterations)
                                 : options.max_iterations;
        std::vector<double> trial(n_err);
        for (; iter < budget; ++iter) {
            gradient(p_hat);
            double f_new = f;
            bool accepted = false;
            for (int bt = 0; bt < 40; ++bt) {
                for (std::size_t e = 0; e < n_err; ++e)
                    trial[e] = std::max(0.0, p_hat[e] - step * grad[e]);
                f_new = objective(trial);
                if (f_new <= f) {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) {
                objective(p_hat);  // restore residuals for the gradient state
                break;
            }
            p_hat.swap(trial);
            if (options.iteration_callback) options.iteration_callback(iter, p_hat);
            bool early = options.fixed_iterations >= 0;
            if (!early && f - f_new <= options.objective_tolerance * std::max(f, 1e-30)) {
                f = f_new;
                ++iter;
                break;
            }
            f = f_new;
            step *= 1.3;
        }
        out.diagnostics.iterations = iter;
        out.diagnostics.residual = f;
        out.diagnostics.converged = options.fixed_iterations >= 0 || iter < budget;
        // Class sums of the fitted rates define nu for reporting.
        out.log_nu.assign(classes, 0.0);
        channel_lambdas(problem, p_hat, lambda);
        std::vector<double> log_mu(n_err, 0.0);
        for (const auto& blk : problem.blocks) {
            // log mu over the channel: inverse-WH of log lambda, scaled by -2.
            std::vector<double> ll(blk.count + 1, 0.0);
            for (std::size_t a = 0; a < blk.count; ++a) ll[a + 1] = std::log(lambda[blk.first + a]);
            inverse_walsh_hadamard(ll, 16);
            for (std::size_t a = 0; a < blk.count; ++a) log_mu[blk.first + a] = -2.0 * ll[a + 1];
        }
        for (std::size_t c = 0; c < classes; ++c)
            for (std::size_t e : part.classes[c]) out.log_nu[c] += log_mu[e];
    }

    out.nu.resize(classes);
    out.class_rates.resize(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        // Shot noise can push a fitted nu slightly above 1; the reported
        // value is clamped into (0, 1].
        if (out.log_nu[c] > 0.0) out.log_nu[c] = 0.0;
        out.nu[c] = std::exp(out.log_nu[c]);
        out.class_rates[c] = -0.5 * out.log_nu[c];
    }
    out.detector_rates = detector_error_rates(out.nu);
    out.p_hat = std::move(p_hat);
    return out;
}

std::vector<double> detector_error_rates(const std::vector<double>& nu) {
    std::vector<double> out(nu.size());
    for (std::size_t i = 0; i < nu.size(); ++i) {
        if (nu[i] <= 0.0 || nu[i] > 1.0 + 1e-12)
            throw std::domain_error("nu outside (0, 1]");
        out[i] = 0.5 * (1.0 - nu[i]);
    }
    return out;
}

std::vector<LayerAverage> layer_averages(const std::vector<double>& p_hat, const NoiseModel& model,
                                         const CliffordCircuit& circuit) {
    if (p_hat.size() != model.num_errors()) throw std::invalid_argument("rate vector mismatch");
    std::map<std::pair<std::size_t, std::size_t>, std::pair<double, std::size_t>> buckets;
    std::size_t flat = 0;
    for (std::size_t id = 0; id < model.channels().size(); ++id) {
        const auto& ch = model.channel(id);
        double total = 0.0;
        for (std::size_t k = 0; k + 1 < ch.probs.size(); ++k) total += p_hat[flat + k];
        flat += ch.probs.size() - 1;
        auto prov = channel_provenance(circuit, ch.support);
        auto& bucket = buckets[{prov.layer, prov.arity}];
        bucket.first += total;
        bucket.second += 1;
    }
    std::vector<LayerAverage> out;
    for (const auto& [key, val] : buckets)
        out.push_back({key.first, key.second, val.first / static_cast<double>(val.second), val.second});
    return out;
}

}  // namespace synlearn
