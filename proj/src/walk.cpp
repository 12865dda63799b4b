#include "grwalk/walk.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <queue>

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>

#include "grwalk/errors.hpp"
#include "grwalk/rng.hpp"

namespace grwalk {

Distribution::Distribution(std::shared_ptr<const Group> group) : group_(std::move(group)) {
  entries_.emplace_back(group_->identity(), 1.0);
}

Distribution::Distribution(std::shared_ptr<const Group> group, std::vector<Entry> entries, double pruned,
                           double absorbed, long long n)
    : group_(std::move(group)), entries_(std::move(entries)), pruned_(pruned), absorbed_(absorbed), n_(n) {
  for (const auto& e : entries_)
    if (!(e.second > 0.0)) throw UsageError("distribution masses must be positive");
}

Distribution Distribution::point_mass(std::shared_ptr<const Group> group, const GroupElement& at) {
  std::vector<Entry> e{{at, 1.0}};
  return Distribution(std::move(group), std::move(e), 0.0, 0.0, 0);
}

double Distribution::stored_mass() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.second;
  return s;
}

double Distribution::mass(const GroupElement& g) const {
  for (const auto& e : entries_)
    if (e.first == g) return e.second;
  return 0.0;
}

absl::flat_hash_map<GroupElement, double, GroupElementHash> Distribution::index() const {
  absl::flat_hash_map<GroupElement, double, GroupElementHash> m;
  m.reserve(entries_.size());
  for (const auto& e : entries_) m.emplace(e.first, e.second);
  return m;
}

std::vector<Distribution::Entry> Distribution::sorted_entries() const {
  std::vector<Entry> out(entries_.begin(), entries_.end());
  std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
  return out;
}

namespace {

using Code = std::span<const std::int64_t>;

struct Probe {
  Code code;
  std::size_t hash;
};

// Sums masses per key in arrival order; keys are kept in first-arrival order
// together with the global product index of that first arrival.
class Accumulator {
 public:
  Accumulator() : index_(0, Hash{this}, Eq{this}) {}
  Accumulator(const Accumulator&) = delete;
  Accumulator& operator=(const Accumulator&) = delete;

  void reserve(std::size_t n) {
    entries_.reserve(n);
    hashes_.reserve(n);
    first_.reserve(n);
    index_.reserve(n);
  }

  void add(Code code, std::size_t hash, double mass, std::uint64_t order) {
    auto it = index_.find(Probe{code, hash});
    if (it != index_.end()) {
      entries_[*it].second += mass;
      return;
    }
    const auto at = static_cast<std::uint32_t>(entries_.size());
    entries_.emplace_back(GroupElement(code), mass);
    hashes_.push_back(hash);
    first_.push_back(order);
    index_.insert(at);
  }

  std::vector<Distribution::Entry>& entries() { return entries_; }
  const std::vector<std::uint64_t>& first() const { return first_; }

 private:
  struct Hash {
    const Accumulator* self;
    using is_transparent = void;
    std::size_t operator()(std::uint32_t i) const { return self->hashes_[i]; }
    std::size_t operator()(const Probe& p) const { return p.hash; }
  };
  struct Eq {
    const Accumulator* self;
    using is_transparent = void;
    bool operator()(std::uint32_t a, std::uint32_t b) const { return a == b; }
    bool operator()(std::uint32_t a, const Probe& p) const { return same(a, p); }
    bool operator()(const Probe& p, std::uint32_t a) const { return same(a, p); }
    bool same(std::uint32_t a, const Probe& p) const {
      if (self->hashes_[a] != p.hash) return false;
      auto c = self->entries_[a].first.code();
      return std::equal(c.begin(), c.end(), p.code.begin(), p.code.end());
    }
  };

  std::vector<Distribution::Entry> entries_;
  std::vector<std::size_t> hashes_;
  std::vector<std::uint64_t> first_;
  absl::flat_hash_set<std::uint32_t, Hash, Eq> index_;
};

constexpr std::size_t kBlock = 1 << 14;  // inputs per parallel block
constexpr std::size_t kSlice = 1 << 10;  // inputs per product task

// Products of one slice, stored flat in product order.
struct ProductBuffer {
  std::vector<std::int64_t> words;
  std::vector<std::size_t> offset;  // size = count + 1
  std::vector<std::size_t> hash;
  std::vector<double> mass;
};

std::vector<Distribution::Entry> accumulate_serial(const Group& g, std::span<const Distribution::Entry> in,
                                                   std::span<const MassEntry> sup) {
  Accumulator acc;
  acc.reserve(in.size() * 2 + 16);
  GroupElement::Code scratch;
  std::uint64_t order = 0;
  for (const auto& [x, m] : in)
    for (const auto& s : sup) {
      g.multiply_into(x, s.element, scratch);
      Code c(scratch.data(), scratch.size());
      acc.add(c, hash_code(c), m * s.mass, order++);
    }
  return std::move(acc.entries());
}

// Same result as accumulate_serial: keys are split into hash partitions, each
// partition sums its keys in product order, and partitions are merged back by
// first-arrival index.
std::vector<Distribution::Entry> accumulate_parallel(const Group& g, std::span<const Distribution::Entry> in,
                                                     std::span<const MassEntry> sup, const ExecutionPolicy& policy) {
  const std::size_t parts = static_cast<std::size_t>(std::max(1u, policy.threads)) * 4;
  std::vector<std::unique_ptr<Accumulator>> acc(parts);
  for (auto& a : acc) {
    a = std::make_unique<Accumulator>();
    a->reserve(in.size() * 2 / parts + 16);
  }
  const std::size_t ns = sup.size();
  for (std::size_t b0 = 0; b0 < in.size(); b0 += kBlock) {
    const std::size_t b1 = std::min(in.size(), b0 + kBlock);
    const std::size_t slices = (b1 - b0 + kSlice - 1) / kSlice;
    std::vector<ProductBuffer> buf(slices);
    parallel_for(slices, policy, [&](std::size_t t) {
      const std::size_t lo = b0 + t * kSlice;
      const std::size_t hi = std::min(b1, lo + kSlice);
      auto& pb = buf[t];
      pb.offset.push_back(0);
      GroupElement::Code scratch;
      for (std::size_t i = lo; i < hi; ++i)
        for (const auto& s : sup) {
          g.multiply_into(in[i].first, s.element, scratch);
          pb.words.insert(pb.words.end(), scratch.begin(), scratch.end());
          pb.offset.push_back(pb.words.size());
          pb.hash.push_back(hash_code(Code(scratch.data(), scratch.size())));
          pb.mass.push_back(in[i].second * s.mass);
        }
    });
    parallel_for(parts, policy, [&](std::size_t p) {
      for (std::size_t t = 0; t < slices; ++t) {
        const auto& pb = buf[t];
        const std::uint64_t base = (b0 + t * kSlice) * ns;
        for (std::size_t k = 0; k < pb.mass.size(); ++k) {
          if ((pb.hash[k] >> 7) % parts != p) continue;
          Code c(pb.words.data() + pb.offset[k], pb.offset[k + 1] - pb.offset[k]);
          acc[p]->add(c, pb.hash[k], pb.mass[k], base + k);
        }
      }
    });
  }
  std::size_t total = 0;
  for (const auto& a : acc) total += a->entries().size();
  std::vector<Distribution::Entry> out;
  out.reserve(total);
  using Head = std::pair<std::uint64_t, std::size_t>;  // first arrival, partition
  std::priority_queue<Head, std::vector<Head>, std::greater<>> heap;
  std::vector<std::size_t> pos(parts, 0);
  for (std::size_t p = 0; p < parts; ++p)
    if (!acc[p]->first().empty()) heap.push({acc[p]->first()[0], p});
  while (!heap.empty()) {
    const std::size_t p = heap.top().second;
    heap.pop();
    out.push_back(std::move(acc[p]->entries()[pos[p]]));
    if (++pos[p] < acc[p]->first().size()) heap.push({acc[p]->first()[pos[p]], p});
  }
  return out;
}

}  // namespace

Distribution convolve(const Distribution& dist, const StepMeasure& step, double prune_eps,
                      const ExecutionPolicy& policy, const KeepFilter& keep) {
  if (dist.group().tag() != step.group().tag()) throw UsageError("distribution and step live on different groups");
  if (!(prune_eps >= 0.0)) throw UsageError("pruning threshold must be nonnegative");
  const Group& g = dist.group();
  auto in = dist.entries();
  auto sup = step.support();
  std::vector<Distribution::Entry> merged = std::max(1u, policy.threads) > 1 && in.size() > kSlice
                                                ? accumulate_parallel(g, in, sup, policy)
                                                : accumulate_serial(g, in, sup);
  double pruned = dist.pruned_mass();
  double absorbed = dist.absorbed_mass();
  std::vector<Distribution::Entry> out;
  out.reserve(merged.size());
  for (auto& e : merged) {
    if (keep && !keep(e.first)) {
      absorbed += e.second;
    } else if (e.second < prune_eps || !(e.second > 0.0)) {
      pruned += e.second;
    } else {
      out.push_back(std::move(e));
    }
  }
  return Distribution(dist.group_ptr(), std::move(out), pruned, absorbed, dist.step() + 1);
}

EntropyValue entropy(const Distribution& dist) {
  EntropyValue r;
  double max_surprisal = 0.0;
  for (const auto& [x, m] : dist.entries()) {
    const double s = -std::log(m);
    r.value += m * s;
    max_surprisal = std::max(max_surprisal, s);
  }
  r.error_bound = dist.pruned_mass() * (max_surprisal + 1.0);
  return r;
}

double escape(const Distribution& dist, const WordMetricCache& cache) {
  if (cache.group().tag() != dist.group().tag()) throw UsageError("cache built for another group");
  double s = 0.0;
  for (const auto& [x, m] : dist.entries()) s += word_length(x, cache) * m;
  return s;
}

double escape(const Distribution& dist, const std::function<std::int64_t(const GroupElement&)>& length) {
  double s = 0.0;
  for (const auto& [x, m] : dist.entries()) s += static_cast<double>(length(x)) * m;
  return s;
}

double squared_norm(const Distribution& dist) {
  double s = 0.0;
  for (const auto& [x, m] : dist.entries()) s += m * m;
  return s;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u(std::istream& is, int bytes) {
  unsigned char b[8] = {};
  if (!is.read(reinterpret_cast<char*>(b), bytes)) throw UsageError("truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) { return std::bit_cast<double>(get_u(is, 8)); }

constexpr char kMagic[8] = {'G', 'R', 'W', 'D', 'I', 'S', 'T', '1'};
constexpr char kObsMagic[8] = {'G', 'R', 'W', 'O', 'B', 'S', 'V', '1'};

std::uint64_t fnv(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xff;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string checkpoint_stem(const StepMeasure& step, double prune_eps) {
  std::uint64_t h = fnv(1469598103934665603ULL, step.group().spec().digest());
  for (const auto& e : step.support()) {
    for (auto w : e.element.code()) h = fnv(h, static_cast<std::uint64_t>(w));
    h = fnv(h, std::bit_cast<std::uint64_t>(e.mass));
  }
  h = fnv(h, std::bit_cast<std::uint64_t>(prune_eps));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("walk-") + buf;
}

void save_observables(const WalkObservables& obs, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  os.write(kObsMagic, 8);
  put_u64(os, obs.identity_mass.size());
  for (std::size_t k = 0; k < obs.identity_mass.size(); ++k) {
    put_f64(os, obs.identity_mass[k]);
    put_f64(os, obs.pruned_mass[k]);
    put_f64(os, obs.entropy[k]);
    put_f64(os, obs.entropy_error[k]);
    put_f64(os, obs.escape[k]);
    put_u64(os, obs.support[k]);
  }
}

bool load_observables(WalkObservables& obs, const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kObsMagic, 8) != 0) return false;
  const std::uint64_t n = get_u(is, 8);
  for (std::uint64_t k = 0; k < n; ++k) {
    obs.identity_mass.push_back(get_f64(is));
    obs.pruned_mass.push_back(get_f64(is));
    obs.entropy.push_back(get_f64(is));
    obs.entropy_error.push_back(get_f64(is));
    obs.escape.push_back(get_f64(is));
    obs.support.push_back(get_u(is, 8));
  }
  return true;
}

}  // namespace

void save_checkpoint(const Distribution& dist, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw UsageError("cannot write checkpoint " + path);
    os.write(kMagic, 8);
    put_u32(os, 1);
    put_u64(os, dist.group().spec().digest());
    put_u64(os, static_cast<std::uint64_t>(dist.step()));
    put_f64(os, dist.pruned_mass());
    put_f64(os, dist.absorbed_mass());
    put_u64(os, dist.size());
    for (const auto& [x, m] : dist.entries()) {
      auto c = x.code();
      put_u32(os, static_cast<std::uint32_t>(c.size()));
      for (auto w : c) put_u64(os, static_cast<std::uint64_t>(w));
      put_f64(os, m);
    }
    if (!os) throw UsageError("failed writing checkpoint " + path);
  }
  std::filesystem::rename(tmp, path);
}

Distribution load_checkpoint(std::shared_ptr<const Group> group, const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UsageError("cannot open checkpoint " + path);
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw UsageError("not a checkpoint file: " + path);
  if (get_u(is, 4) != 1) throw UsageError("unsupported checkpoint version");
  if (get_u(is, 8) != group->spec().digest()) throw UsageError("checkpoint belongs to another group");
  const auto n = static_cast<long long>(get_u(is, 8));
  const double pruned = get_f64(is);
  const double absorbed = get_f64(is);
  const std::uint64_t count = get_u(is, 8);
  std::vector<Distribution::Entry> entries;
  entries.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto w = get_u(is, 4);
    GroupElement::Code c;
    for (std::uint64_t j = 0; j < w; ++j) c.push_back(static_cast<std::int64_t>(get_u(is, 8)));
    GroupElement g(std::move(c));
    if (!group->is_valid(g)) throw UsageError("checkpoint holds an invalid element");
    entries.emplace_back(std::move(g), get_f64(is));
  }
  absl::flat_hash_set<GroupElement, GroupElementHash> seen;
  for (const auto& e : entries)
    if (!seen.insert(e.first).second) throw UsageError("checkpoint holds a repeated element");
  return Distribution(std::move(group), std::move(entries), pruned, absorbed, n);
}

WalkObservables compute_observables(const StepMeasure& step, long long steps, const ObservableOptions& opts) {
  if (steps < 0) throw UsageError("number of steps must be nonnegative");
  auto group = step.group_ptr();
  WalkObservables obs;
  const GroupElement id = group->identity();

  std::function<std::int64_t(const GroupElement&)> length;
  std::optional<WordMetricCache> cache;
  if (opts.compute_escape && group->closed_form_length(id)) {
    obs.escape_method = "closed-form";
    length = [&](const GroupElement& x) { return *group->closed_form_length(x); };
  } else if (opts.compute_escape) {
    obs.escape_method = "bfs";
    cache.emplace(group);
  } else {
    obs.escape_method = "none";
  }

  auto record = [&](const Distribution& d) {
    obs.identity_mass.push_back(d.mass(id));
    obs.pruned_mass.push_back(d.pruned_mass());
    auto h = entropy(d);
    obs.entropy.push_back(h.value);
    obs.entropy_error.push_back(h.error_bound);
    obs.support.push_back(d.size());
    double esc = std::numeric_limits<double>::quiet_NaN();
    if (length) {
      esc = escape(d, length);
    } else if (cache) {
      try {
        cache->extend(static_cast<int>(d.step()), opts.ball_cap);
        esc = escape(d, *cache);
      } catch (const ResourceError&) {
        cache.reset();
        obs.escape_method = "bfs-partial";
      }
    }
    obs.escape.push_back(esc);
  };

  Distribution d(group);
  std::string stem;
  if (!opts.checkpoint_dir.empty()) {
    std::filesystem::create_directories(opts.checkpoint_dir);
    stem = (std::filesystem::path(opts.checkpoint_dir) / checkpoint_stem(step, opts.prune_eps)).string();
    if (std::filesystem::exists(stem + ".ckpt") && std::filesystem::exists(stem + ".obs")) {
      Distribution saved = load_checkpoint(group, stem + ".ckpt");
      WalkObservables prev;
      if (saved.step() <= steps && load_observables(prev, stem + ".obs") &&
          prev.steps() == saved.step() && !std::any_of(prev.escape.begin(), prev.escape.end(),
                                                       [](double x) { return std::isnan(x); })) {
        obs.identity_mass = prev.identity_mass;
        obs.pruned_mass = prev.pruned_mass;
        obs.entropy = prev.entropy;
        obs.entropy_error = prev.entropy_error;
        obs.escape = prev.escape;
        obs.support = prev.support;
        obs.resumed = saved.step() > 0;
        d = std::move(saved);
        if (cache) cache->extend(static_cast<int>(d.step()), opts.ball_cap);
      }
    }
  }
  if (obs.identity_mass.empty()) record(d);

  while (d.step() < steps) {
    Distribution next = convolve(d, step, opts.prune_eps, opts.policy);
    if (next.size() > opts.support_cap) {
      if (!opts.partial_ok)
        throw ResourceError("support cap exceeded at step " + std::to_string(next.step()), d.step());
      obs.truncated = true;
      break;
    }
    d = std::move(next);
    record(d);
  }

  if (!stem.empty() && d.step() > 0) {
    save_checkpoint(d, stem + ".ckpt");
    save_observables(obs, stem + ".obs");
  }
  return obs;
}

ReturnCurve return_probability_curve(const StepMeasure& step, long long n_max, double prune_eps,
                                     const ExecutionPolicy& policy) {
  if (!step.symmetric()) throw UsageError("return probability curve needs a symmetric step");
  ReturnCurve out;
  const GroupElement id = step.group().identity();
  Distribution d(step.group_ptr());
  out.value.push_back(1.0);
  out.upper.push_back(1.0);
  for (long long k = 1; k <= 2 * n_max; ++k) {
    d = convolve(d, step, prune_eps, policy);
    if (k % 2 == 0) {
      out.value.push_back(d.mass(id));
      out.upper.push_back(d.mass(id) + d.pruned_mass());
    }
  }
  return out;
}

double entropy_slope(const WalkObservables& obs, long long n, long long m) {
  if (m < 1 || n < m || n > obs.steps()) throw UsageError("entropy slope window outside computed range");
  return (obs.entropy[static_cast<std::size_t>(n)] - obs.entropy[static_cast<std::size_t>(n - m)]) /
         static_cast<double>(m);
}

std::vector<double> entropy_slope(const WalkObservables& obs, long long m) {
  std::vector<double> out;
  for (long long n = m; n <= obs.steps(); ++n) out.push_back(entropy_slope(obs, n, m));
  return out;
}

namespace {

MeanEstimate estimate(const std::vector<double>& rec, std::size_t stride, std::size_t offset, long long count) {
  MeanEstimate e;
  double sum = 0.0;
  for (long long p = 0; p < count; ++p) sum += rec[static_cast<std::size_t>(p) * stride + offset];
  e.mean = sum / static_cast<double>(count);
  if (count > 1) {
    double ss = 0.0;
    for (long long p = 0; p < count; ++p) {
      const double dlt = rec[static_cast<std::size_t>(p) * stride + offset] - e.mean;
      ss += dlt * dlt;
    }
    e.stderr_ = std::sqrt(ss / static_cast<double>(count - 1) / static_cast<double>(count));
  }
  return e;
}

}  // namespace

SampleStats sample_paths(const StepMeasure& step, const SampleOptions& opts) {
  if (opts.count < 1) throw UsageError("sample count must be >= 1");
  std::vector<long long> grid = opts.grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty() || grid.front() < 0) throw UsageError("sampling grid must be nonempty and nonnegative");
  const long long horizon = grid.back();
  const Group& group = step.group();

  std::vector<double> weights;
  for (const auto& e : step.support()) weights.push_back(e.mass);
  const DiscreteSampler sampler(weights);

  const std::size_t G = grid.size();
  const std::size_t A = opts.alphas.size();
  const bool track_exit = static_cast<bool>(opts.inside);
  const std::size_t stride = G * (1 + A + (track_exit ? 1 : 0));
  std::vector<double> rec(static_cast<std::size_t>(opts.count) * stride, 0.0);
  std::vector<GroupElement> endpoints(opts.endpoint_histogram ? static_cast<std::size_t>(opts.count) : 0);

  constexpr long long kPathsPerTask = 1024;
  const auto tasks = static_cast<std::size_t>((opts.count + kPathsPerTask - 1) / kPathsPerTask);
  parallel_for(tasks, opts.policy, [&](std::size_t t) {
    auto walker = group.make_walker(step);
    auto length_now = [&]() -> std::int64_t {
      std::int64_t l = walker->length();
      if (l >= 0) return l;
      if (!opts.cache) throw UsageError("sampling needs a word metric cache for this group");
      return word_length(walker->element(), *opts.cache);
    };
    const long long first = static_cast<long long>(t) * kPathsPerTask;
    const long long last = std::min(opts.count, first + kPathsPerTask);
    for (long long p = first; p < last; ++p) {
      PhiloxStream rng(opts.seed, static_cast<std::uint64_t>(p));
      walker->reset();
      std::int64_t len = 0, max_len = 0;
      bool exited = track_exit && !opts.inside(walker->element());
      double* out = &rec[static_cast<std::size_t>(p) * stride];
      std::size_t gi = 0;
      for (long long k = 0;; ++k) {
        while (gi < G && grid[gi] == k) {
          out[gi] = static_cast<double>(len);
          for (std::size_t a = 0; a < A; ++a)
            out[G * (1 + a) + gi] = std::pow(static_cast<double>(max_len), opts.alphas[a]);
          if (track_exit) out[G * (1 + A) + gi] = exited ? 1.0 : 0.0;
          ++gi;
        }
        if (k == horizon) break;
        walker->step(sampler(rng));
        len = length_now();
        max_len = std::max(max_len, len);
        if (track_exit && !exited) exited = !opts.inside(walker->element());
      }
      if (opts.endpoint_histogram) endpoints[static_cast<std::size_t>(p)] = walker->element();
    }
  });

  SampleStats s;
  s.grid = grid;
  s.count = opts.count;
  for (std::size_t gi = 0; gi < G; ++gi) s.displacement.push_back(estimate(rec, stride, gi, opts.count));
  s.max_moment.resize(A);
  for (std::size_t a = 0; a < A; ++a)
    for (std::size_t gi = 0; gi < G; ++gi)
      s.max_moment[a].push_back(estimate(rec, stride, G * (1 + a) + gi, opts.count));
  if (track_exit)
    for (std::size_t gi = 0; gi < G; ++gi) s.exit_prob.push_back(estimate(rec, stride, G * (1 + A) + gi, opts.count));
  for (auto& e : endpoints) ++s.endpoint_counts[e];
  return s;
}

}  // namespace grwalk
