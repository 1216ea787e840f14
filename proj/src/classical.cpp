#include "hydrolab/classical.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <stdexcept>
#include <string>

namespace hydrolab {

const char* to_string(ModelVariant v) {
  return v == ModelVariant::SimpleExclusion ? "simple-exclusion" : "zero-range";
}

ReservoirFunction two_sided_reservoir(double left, double right) {
  return [left, right](const Eigen::VectorXd& x) { return x(0) < 0.5 ? left : right; };
}

double sep_entry_rate_for_density(double density, int exits) {
  if (!(density > 0.0 && density < 1.0)) {
    throw std::invalid_argument("sep_entry_rate_for_density: density must lie in (0,1)");
  }
  return exits * density / (1.0 - density);
}

double sep_reservoir_density(double entry_rate, int exits) { return entry_rate / (entry_rate + exits); }

RateFunction constant_rate() {
  return [](int k) { return k >= 1 ? 1.0 : 0.0; };
}

namespace {

ClassicalModel sample_boundary(const LatticeGeometry& g, const ReservoirFunction& h) {
  ClassicalModel m;
  m.entry.assign(g.size(), 0.0);
  m.exits.assign(g.size(), 0);
  for (std::size_t b : g.boundary()) {
    const double value = h(g.position(b));
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw std::invalid_argument("reservoir function must be strictly positive on the boundary (site " +
                                  std::to_string(b) + " gives " + std::to_string(value) + ")");
    }
    m.entry[b] = value;
    m.exits[b] = g.exit_multiplicity(b);
  }
  return m;
}

}  // namespace

ClassicalModel make_exclusion_model(const LatticeGeometry& g, const ReservoirFunction& h) {
  ClassicalModel m = sample_boundary(g, h);
  m.variant = ModelVariant::SimpleExclusion;
  m.cap = 1;
  m.jump_rate = {0.0, 1.0};
  return m;
}

ClassicalModel make_zero_range_model(const LatticeGeometry& g, const ReservoirFunction& h, const RateFunction& rate,
                                     int n_max) {
  if (n_max < 1 || n_max > 255) throw std::invalid_argument("zero range cap n_max must lie in [1, 255]");
  ClassicalModel m = sample_boundary(g, h);
  m.variant = ModelVariant::ZeroRange;
  m.cap = n_max;
  m.jump_rate.resize(static_cast<std::size_t>(n_max) + 1);
  for (int k = 0; k <= n_max; ++k) {
    const double v = rate(k);
    if (k == 0 && v != 0.0) throw std::invalid_argument("zero range rate must satisfy g(0) = 0");
    if (k >= 1 && !(v > 0.0)) {
      throw std::invalid_argument("zero range rate must be positive for k >= 1 (g(" + std::to_string(k) + ") = " +
                                  std::to_string(v) + ")");
    }
    m.jump_rate[static_cast<std::size_t>(k)] = v;
  }
  return m;
}

long Configuration::total() const {
  long s = 0;
  for (auto v : n) s += v;
  return s;
}

std::vector<Event> event_rates(const Configuration& c, const ClassicalModel& model, const LatticeGeometry& g) {
  std::vector<Event> out;
  for (std::size_t x = 0; x < g.size(); ++x) {
    const int nx = c.n[x];
    const double gx = model.g(nx);
    if (gx > 0.0) {
      for (std::size_t y : g.neighbors(x)) {
        if (c.n[y] < model.cap) {
          out.push_back({EventKind::BulkJump, static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y), gx});
        }
      }
    }
  }
  for (std::size_t b : g.boundary()) {
    const double exit = model.exits[b] * model.g(c.n[b]);
    if (exit > 0.0) out.push_back({EventKind::BoundaryExit, static_cast<std::uint32_t>(b), 0, exit});
    if (c.n[b] < model.cap && model.entry[b] > 0.0) {
      out.push_back({EventKind::BoundaryEntry, static_cast<std::uint32_t>(b), 0, model.entry[b]});
    }
  }
  return out;
}

Configuration apply_event(const Configuration& c, const Event& e, const ClassicalModel& model) {
  Configuration out = c;
  auto& n = out.n;
  switch (e.kind) {
    case EventKind::BulkJump:
      if (n[e.site] >= 1 && n[e.target] < model.cap) {
        --n[e.site];
        ++n[e.target];
      }
      break;
    case EventKind::BoundaryExit:
      if (n[e.site] >= 1) --n[e.site];
      break;
    case EventKind::BoundaryEntry:
      if (n[e.site] < model.cap) ++n[e.site];
      break;
  }
  return out;
}

Simulator::Simulator(const LatticeGeometry& g, const ClassicalModel& model, Configuration initial, Engine rng)
    : model_(&model), state_(std::move(initial)), rng_(std::move(rng)) {
  if (state_.size() != g.size() || model.sites() != g.size()) {
    throw std::invalid_argument("Simulator: configuration, model and geometry sizes differ");
  }
  for (auto v : state_.n) {
    if (v > model.cap) throw std::invalid_argument("Simulator: initial occupancy exceeds the alphabet");
  }
  std::vector<std::vector<std::size_t>> deps(g.size());
  auto add = [&](Event e, std::initializer_list<std::size_t> sites) {
    for (std::size_t s : sites) deps[s].push_back(table_.size());
    table_.push_back(e);
  };
  for (std::size_t x = 0; x < g.size(); ++x) {
    for (std::size_t y : g.neighbors(x)) {
      add({EventKind::BulkJump, static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y), 0.0}, {x, y});
    }
    if (model.exits[x] > 0) add({EventKind::BoundaryExit, static_cast<std::uint32_t>(x), 0, 0.0}, {x});
    if (model.entry[x] > 0.0) add({EventKind::BoundaryEntry, static_cast<std::uint32_t>(x), 0, 0.0}, {x});
  }
  dep_offsets_.assign(g.size() + 1, 0);
  for (std::size_t s = 0; s < g.size(); ++s) {
    deps_.insert(deps_.end(), deps[s].begin(), deps[s].end());
    dep_offsets_[s + 1] = deps_.size();
  }
  rates_.resize(table_.size());
  for (std::size_t k = 0; k < table_.size(); ++k) rates_[k] = potential_rate(k);
  total_ = total_rate();
}

double Simulator::potential_rate(std::size_t k) const {
  const Event& e = table_[k];
  const auto& n = state_.n;
  const ClassicalModel& m = *model_;
  switch (e.kind) {
    case EventKind::BulkJump:
      return n[e.target] < m.cap ? m.g(n[e.site]) : 0.0;
    case EventKind::BoundaryExit:
      return m.exits[e.site] * m.g(n[e.site]);
    case EventKind::BoundaryEntry:
      return n[e.site] < m.cap ? m.entry[e.site] : 0.0;
  }
  return 0.0;
}

void Simulator::refresh(std::uint32_t site) {
  for (std::size_t i = dep_offsets_[site]; i < dep_offsets_[site + 1]; ++i) {
    const std::size_t k = deps_[i];
    const double r = potential_rate(k);
    total_ += r - rates_[k];
    rates_[k] = r;
  }
}

double Simulator::total_rate() const {
  double total = 0.0;
  for (double r : rates_) total += r;
  return total;
}

std::optional<Event> Simulator::step_until(double t_stop) {
  // The running total drifts by rounding; re-sum it now and then.
  if (++since_resum_ == 4096) {
    total_ = total_rate();
    since_resum_ = 0;
  }
  const double total = total_;
  if (!(total > 0.0)) {
    time_ = std::max(time_, t_stop);
    return std::nullopt;
  }
  const double u = 1.0 - std::generate_canonical<double, 53>(rng_);
  const double wait = -std::log(u) / total;
  if (time_ + wait > t_stop) {
    time_ = t_stop;
    return std::nullopt;
  }
  time_ += wait;
  const double target = std::generate_canonical<double, 53>(rng_) * total;
  double acc = 0.0;
  std::size_t chosen = rates_.size();
  const std::size_t size = rates_.size();
  for (std::size_t k = 0; k < size; ++k) {
    acc += rates_[k];
    if (target < acc) {
      chosen = k;
      break;
    }
  }
  if (chosen == size || rates_[chosen] <= 0.0) {
    // target landed past the last positive rate through rounding
    chosen = size;
    while (chosen > 0 && rates_[chosen - 1] <= 0.0) --chosen;
    if (chosen == 0) throw std::logic_error("Simulator: positive total rate but no enabled event");
    --chosen;
  }
  Event e = table_[chosen];
  e.rate = rates_[chosen];
  auto& n = state_.n;
  switch (e.kind) {
    case EventKind::BulkJump:
      --n[e.site];
      ++n[e.target];
      break;
    case EventKind::BoundaryExit:
      --n[e.site];
      break;
    case EventKind::BoundaryEntry:
      ++n[e.site];
      break;
  }
  refresh(e.site);
  if (e.kind == EventKind::BulkJump) refresh(e.target);
  return e;
}

Configuration Trajectory::replay(const ClassicalModel& model) const {
  Configuration c = initial;
  for (const auto& te : events) c = apply_event(c, te.event, model);
  return c;
}

Trajectory simulate(const Configuration& c0, const ClassicalModel& model, const LatticeGeometry& g, double t_end,
                    std::uint64_t seed, std::uint64_t stream) {
  if (!(t_end > 0.0)) throw std::invalid_argument("simulate: t_end must be positive");
  Simulator sim(g, model, c0, make_stream(seed, stream));
  Trajectory t{c0, {}, t_end, seed, stream};
  while (auto e = sim.step_until(t_end)) t.events.push_back({sim.time(), *e});
  return t;
}

OccupationPath sample_run(Simulator& sim, double micro_dt, Eigen::Index samples, double time_unit,
                          const Eigen::MatrixXd& integrands) {
  if (!(micro_dt > 0.0) || samples < 1) throw std::invalid_argument("sample_run: need micro_dt > 0, samples >= 1");
  const auto sites = static_cast<Eigen::Index>(sim.state().size());
  const bool tracked = integrands.size() > 0;
  if (tracked && integrands.rows() != sites) throw std::invalid_argument("sample_run: integrand rows != sites");

  OccupationPath path;
  path.dt = micro_dt / time_unit;
  path.values.resize(samples, sites);
  path.integrands = integrands;
  if (tracked) path.integrals = Eigen::MatrixXd::Zero(samples - 1, integrands.cols());

  auto record = [&](Eigen::Index row) {
    const auto& n = sim.state().n;
    for (Eigen::Index s = 0; s < sites; ++s) path.values(row, s) = n[static_cast<std::size_t>(s)];
  };
  Eigen::RowVectorXd current;
  if (tracked) current = path.values.row(0).cast<double>() * 0.0;
  const double t0 = sim.time();
  record(0);
  if (tracked) current = path.values.row(0).cast<double>() * integrands;
  for (Eigen::Index k = 1; k < samples; ++k) {
    const double t_stop = t0 + static_cast<double>(k) * micro_dt;
    double last = sim.time();
    while (true) {
      auto e = sim.step_until(t_stop);
      if (tracked) path.integrals.row(k - 1) += current * ((sim.time() - last) / time_unit);
      last = sim.time();
      if (!e) break;
      if (tracked) {
        switch (e->kind) {
          case EventKind::BulkJump:
            current += integrands.row(e->target) - integrands.row(e->site);
            break;
          case EventKind::BoundaryExit:
            current -= integrands.row(e->site);
            break;
          case EventKind::BoundaryEntry:
            current += integrands.row(e->site);
            break;
        }
      }
    }
    record(k);
  }
  return path;
}

Eigen::Index apply_burn_in(OccupationPath& path) {
  const Eigen::VectorXd total = path.project(Eigen::VectorXd::Ones(path.nodes()));
  const auto drop = static_cast<Eigen::Index>(burn_in_samples({total.data(), static_cast<std::size_t>(total.size())}));
  if (2 * drop > path.samples()) {
    throw std::runtime_error("apply_burn_in: burn-in of " + std::to_string(drop) + " samples exceeds half of the " +
                             std::to_string(path.samples()) + "-sample path");
  }
  path.drop_leading(drop);
  return drop;
}

std::vector<CovarianceEstimate> estimate_statistics(const std::vector<OccupationPath>& paths,
                                                    const Eigen::MatrixXd& observables, BatchPolicy policy) {
  std::vector<CovarianceEstimate> out;
  for (Eigen::Index k = 0; k < observables.cols(); ++k) {
    std::vector<Eigen::VectorXd> series;
    series.reserve(paths.size());
    for (const auto& p : paths) series.push_back(p.project(observables.col(k)));
    out.push_back(batch_means(series, policy));
  }
  return out;
}

Configuration sample_product_state(const Eigen::MatrixXd& marginals, Engine& rng) {
  Configuration c = Configuration::empty(static_cast<std::size_t>(marginals.rows()));
  for (Eigen::Index x = 0; x < marginals.rows(); ++x) {
    const double u = std::generate_canonical<double, 53>(rng);
    double acc = 0.0;
    Eigen::Index k = 0;
    for (; k < marginals.cols() - 1; ++k) {
      acc += marginals(x, k);
      if (u < acc) break;
    }
    c.n[static_cast<std::size_t>(x)] = static_cast<std::uint8_t>(k);
  }
  return c;
}

Eigen::MatrixXd bernoulli_marginals(const Eigen::VectorXd& density) {
  Eigen::MatrixXd m(density.size(), 2);
  m.col(0) = 1.0 - density.array();
  m.col(1) = density;
  return m;
}

ConfigurationSpace::ConfigurationSpace(std::size_t sites, int cap, std::size_t guard)
    : sites_(sites), cap_(cap), size_(1) {
  const auto base = static_cast<std::size_t>(cap) + 1;
  for (std::size_t i = 0; i < sites; ++i) {
    if (size_ > guard / base) {
      throw std::length_error("configuration space " + std::to_string(base) + "^" + std::to_string(sites) +
                              " exceeds the enumeration guard of " + std::to_string(guard) + " states");
    }
    size_ *= base;
  }
}

Configuration ConfigurationSpace::decode(std::size_t index) const {
  Configuration c = Configuration::empty(sites_);
  const auto base = static_cast<std::size_t>(cap_) + 1;
  for (std::size_t i = sites_; i-- > 0;) {
    c.n[i] = static_cast<std::uint8_t>(index % base);
    index /= base;
  }
  return c;
}

std::size_t ConfigurationSpace::encode(const Configuration& c) const {
  const auto base = static_cast<std::size_t>(cap_) + 1;
  std::size_t index = 0;
  for (auto v : c.n) index = index * base + v;
  return index;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> build_generator_matrix(const ClassicalModel& model,
                                                                    const LatticeGeometry& g, std::size_t guard) {
  const ConfigurationSpace space(g.size(), model.cap, guard);
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Configuration c = space.decode(i);
    double out = 0.0;
    for (const Event& e : event_rates(c, model, g)) {
      const std::size_t j = space.encode(apply_event(c, e, model));
      if (j == i) continue;
      t.emplace_back(static_cast<int>(i), static_cast<int>(j), e.rate);
      out += e.rate;
    }
    t.emplace_back(static_cast<int>(i), static_cast<int>(i), -out);
  }
  const auto n = static_cast<Eigen::Index>(space.size());
  Eigen::SparseMatrix<double, Eigen::RowMajor> G(n, n);
  G.setFromTriplets(t.begin(), t.end());
  return G;
}

namespace {

// The stationary measures of a finite chain form a space whose dimension is
// the number of closed communicating classes (Tarjan SCC on the jump graph).
int closed_class_count(const Eigen::SparseMatrix<double, Eigen::RowMajor>& G) {
  const auto n = static_cast<int>(G.rows());
  std::vector<int> index(n, -1), low(n, 0), component(n, -1), stack;
  std::vector<char> on_stack(n, 0);
  int counter = 0, components = 0;
  struct Frame {
    int v;
    Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it;
  };
  std::vector<Frame> frames;
  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    frames.push_back({root, {G, root}});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      Frame& f = frames.back();
      bool descended = false;
      for (; f.it; ++f.it) {
        const int w = static_cast<int>(f.it.col());
        if (w == f.v || f.it.value() <= 0.0) continue;
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          ++f.it;
          frames.push_back({w, {G, w}});
          descended = true;
          break;
        }
        if (on_stack[w]) low[f.v] = std::min(low[f.v], index[w]);
      }
      if (descended) continue;
      const int v = f.v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      if (low[v] == index[v]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          component[w] = components;
        } while (w != v);
        ++components;
      }
    }
  }
  std::vector<char> closed(components, 1);
  for (int v = 0; v < n; ++v) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(G, v); it; ++it) {
      const auto w = static_cast<int>(it.col());
      if (w != v && it.value() > 0.0 && component[w] != component[v]) closed[component[v]] = 0;
    }
  }
  int count = 0;
  for (char c : closed) count += c;
  return count;
}

}  // namespace

StationaryDistribution stationary_distribution(const Eigen::SparseMatrix<double, Eigen::RowMajor>& generator) {
  const Eigen::Index n = generator.rows();
  if (generator.cols() != n) throw std::invalid_argument("stationary_distribution: generator must be square");
  Eigen::SparseMatrix<double> At = generator.transpose();

  // Replace the first balance equation by the normalization.
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index col = 0; col < At.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(At, col); it; ++it) {
      if (it.row() != 0) t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) t.emplace_back(0, static_cast<int>(j), 1.0);
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);

  StationaryDistribution out;
  out.null_dimension = closed_class_count(generator);
  if (lu.info() != Eigen::Success) {
    out.probability = Eigen::VectorXd::Constant(n, std::nan(""));
    return out;
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(0) = 1.0;
  out.probability = lu.solve(rhs);
  out.probability = out.probability.cwiseMax(0.0);
  out.probability /= out.probability.sum();
  return out;
}

}  // namespace hydrolab
