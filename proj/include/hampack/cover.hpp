#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hampack/partition.hpp"
#include "hampack/permutation.hpp"
#include "hampack/rng.hpp"
#include "hampack/types.hpp"

namespace hampack {

/// Leaf target for the out-tree and cap on the used-vertex set.
struct Phase2Budget {
  std::size_t nu = 0;
  std::size_t w_cap = 0;

  /// sqrt(n) ln n leaves and n^{3/4} used vertices. At n in the thousands the
  /// leaf target alone exceeds the vertex cap, so this preset only becomes
  /// usable for very large n.
  static Phase2Budget asymptotic(std::size_t n) {
    const double nd = static_cast<double>(n);
    return {static_cast<std::size_t>(std::ceil(std::sqrt(nd) * std::log(nd))),
            static_cast<std::size_t>(std::floor(std::pow(nd, 0.75)))};
  }

  /// sqrt(n)/2 leaves, three quarters of the vertices usable. The in-tree
  /// closes at rate ~ leaves/n per examined edge while the out-tree costs
  /// ~ leaves used vertices, so a smaller leaf target spends W more evenly
  /// across the ~ln n small cycles.
  static Phase2Budget desk(std::size_t n) {
    return {static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n)) / 2.0)), 3 * n / 4};
  }
};

/// The set W of vertices whose edges have been looked at. Each entry is
/// stamped with the tree level during which it joined, so "not in W at the
/// start of this level" is a single comparison.
class UsedVertices {
 public:
  explicit UsedVertices(std::size_t n = 0) : stamp_(n, 0) {}

  void begin_level() { ++serial_; }
  void add(Vertex v) {
    if (stamp_[v] == 0) {
      stamp_[v] = serial_;
      ++size_;
    }
  }
  bool contains(Vertex v) const { return stamp_[v] != 0; }
  bool usable(Vertex v) const { return stamp_[v] == 0 || stamp_[v] == serial_; }
  std::size_t size() const { return size_; }

 private:
  std::vector<std::uint32_t> stamp_;
  std::uint32_t serial_ = 1;
  std::size_t size_ = 0;
};

namespace detail {

/// A run of `length` consecutive vertices of a cycle of the iteration's root
/// permutation digraph, starting at position `start` of that cycle.
struct Segment {
  std::uint32_t cycle = 0;
  std::uint32_t start = 0;
  std::uint32_t length = 0;
};

using SegmentList = std::vector<Segment>;

/// A near permutation digraph relative to the root: its path, the cycles
/// created while growing it, and which root cycles those pieces came from.
/// Root cycles not listed in `touched` are still cycles of the NPD.
struct Npd {
  SegmentList path;
  std::vector<SegmentList> created;
  std::vector<std::uint32_t> touched;  // sorted
  std::size_t path_length = 0;
};

enum class StepResult { accepted, rejected, closes };

class NpdOps {
 public:
  static constexpr std::size_t npos = ~std::size_t{0};

  NpdOps(const PermutationDigraph& root, double n0) : root_(root), n0_(n0) {}

  const PermutationDigraph& root() const { return root_; }

  Vertex at(const Segment& s, std::size_t t) const {
    const auto cyc = root_.cycle(s.cycle);
    return cyc[(s.start + t) % cyc.size()];
  }

  static std::size_t length(const SegmentList& list) {
    std::size_t total = 0;
    for (const auto& s : list) total += s.length;
    return total;
  }

  Vertex vertex_at(const SegmentList& list, std::size_t offset) const {
    for (const auto& s : list) {
      if (offset < s.length) return at(s, offset);
      offset -= s.length;
    }
    throw Error(ErrorCode::contract_violation, "offset beyond segment list");
  }

  Vertex first(const SegmentList& list) const { return at(list.front(), 0); }
  Vertex last(const SegmentList& list) const { return at(list.back(), list.back().length - 1); }

  std::size_t offset_of(const SegmentList& list, Vertex v) const {
    const auto cyc = root_.cycle_of(v);
    const std::size_t len = root_.cycle_length(cyc);
    std::size_t base = 0;
    for (const auto& s : list) {
      if (s.cycle == cyc) {
        const std::size_t d = (root_.position(v) + len - s.start) % len;
        if (d < s.length) return base + d;
      }
      base += s.length;
    }
    return npos;
  }

  /// ([0, o), [o, L)).
  static std::pair<SegmentList, SegmentList> split(const SegmentList& list, std::size_t o) {
    SegmentList head, tail;
    for (const auto& s : list) {
      if (o >= s.length) {
        head.push_back(s);
        o -= s.length;
      } else if (o == 0) {
        tail.push_back(s);
      } else {
        head.push_back({s.cycle, s.start, static_cast<std::uint32_t>(o)});
        tail.push_back({s.cycle, static_cast<std::uint32_t>(s.start + o), static_cast<std::uint32_t>(s.length - o)});
        o = 0;
      }
    }
    return {std::move(head), std::move(tail)};
  }

  /// The cycle `list` read starting from offset o.
  static SegmentList rotate(const SegmentList& list, std::size_t o) {
    auto [head, tail] = split(list, o);
    tail.insert(tail.end(), head.begin(), head.end());
    return tail;
  }

  bool touched(const Npd& u, std::uint32_t cycle) const {
    return std::binary_search(u.touched.begin(), u.touched.end(), cycle);
  }

  static void touch(Npd& u, std::uint32_t cycle) {
    u.touched.insert(std::lower_bound(u.touched.begin(), u.touched.end(), cycle), cycle);
  }

  /// The NPD obtained by deleting the root edge (v0, succ v0) of a cycle.
  Npd initial(Vertex v0) const {
    Npd u;
    const Vertex u0 = root_.succ(v0);
    const auto cyc = root_.cycle_of(u0);
    u.path.push_back({cyc, root_.position(u0), static_cast<std::uint32_t>(root_.cycle_length(cyc))});
    u.touched.push_back(cyc);
    u.path_length = root_.cycle_length(cyc);
    return u;
  }

  /// Add (end, w) and delete the edge (x, w), where x must be the root
  /// predecessor of w. `closes` means w is the path start.
  StepResult out_step(const Npd& u, Vertex w, Npd& next) const {
    const std::size_t len = u.path_length;
    if (w == first(u.path)) return static_cast<double>(len) >= n0_ ? StepResult::closes : StepResult::rejected;
    const Vertex x = root_.pred(w);
    const auto cyc = root_.cycle_of(w);
    if (!touched(u, cyc)) {
      next = u;
      next.path.push_back({cyc, root_.position(w), static_cast<std::uint32_t>(root_.cycle_length(cyc))});
      touch(next, cyc);
      next.path_length = len + root_.cycle_length(cyc);
      return long_enough(next.path_length) ? StepResult::accepted : StepResult::rejected;
    }
    if (const auto o = offset_of(u.path, w); o != npos) {
      if (!long_enough(o) || !long_enough(len - o)) return StepResult::rejected;
      auto [head, tail] = split(u.path, o);
      if (last(head) != x) return StepResult::rejected;
      next = u;
      next.path = std::move(head);
      next.created.push_back(std::move(tail));
      next.path_length = o;
      return StepResult::accepted;
    }
    for (std::size_t q = 0; q < u.created.size(); ++q) {
      const auto o = offset_of(u.created[q], w);
      if (o == npos) continue;
      auto piece = rotate(u.created[q], o);
      if (last(piece) != x) return StepResult::rejected;
      next = u;
      next.path_length = len + length(piece);
      next.path.insert(next.path.end(), piece.begin(), piece.end());
      next.created.erase(next.created.begin() + static_cast<std::ptrdiff_t>(q));
      return long_enough(next.path_length) ? StepResult::accepted : StepResult::rejected;
    }
    throw Error(ErrorCode::contract_violation, "vertex " + std::to_string(w) + " missing from NPD");
  }

  /// Add (w, start) and delete the edge (w, x), where x must be the root
  /// successor of w; x becomes the path start. `closes` means w is the path end.
  StepResult in_step(const Npd& u, Vertex w, Npd& next) const {
    const std::size_t len = u.path_length;
    if (w == last(u.path)) return long_enough(len) ? StepResult::closes : StepResult::rejected;
    const Vertex x = root_.succ(w);
    const auto cyc = root_.cycle_of(w);
    if (!touched(u, cyc)) {
      next = u;
      next.path.insert(next.path.begin(),
                       Segment{cyc, root_.position(x), static_cast<std::uint32_t>(root_.cycle_length(cyc))});
      touch(next, cyc);
      next.path_length = len + root_.cycle_length(cyc);
      return StepResult::accepted;
    }
    if (const auto o = offset_of(u.path, w); o != npos) {
      if (!long_enough(o + 1) || !long_enough(len - o - 1)) return StepResult::rejected;
      auto [head, tail] = split(u.path, o + 1);
      if (first(tail) != x) return StepResult::rejected;
      next = u;
      next.path = std::move(tail);
      next.created.push_back(std::move(head));
      next.path_length = len - o - 1;
      return StepResult::accepted;
    }
    for (std::size_t q = 0; q < u.created.size(); ++q) {
      const auto o = offset_of(u.created[q], w);
      if (o == npos) continue;
      auto piece = rotate(u.created[q], (o + 1) % length(u.created[q]));
      if (first(piece) != x) return StepResult::rejected;
      next = u;
      next.path_length = len + length(piece);
      piece.insert(piece.end(), next.path.begin(), next.path.end());
      next.path = std::move(piece);
      next.created.erase(next.created.begin() + static_cast<std::ptrdiff_t>(q));
      return StepResult::accepted;
    }
    throw Error(ErrorCode::contract_violation, "vertex " + std::to_string(w) + " missing from NPD");
  }

 private:
  bool long_enough(std::size_t len) const { return static_cast<double>(len) >= n0_; }

  const PermutationDigraph& root_;
  double n0_;
};

}  // namespace detail

struct Phase2Options {
  Phase2Budget budget;
  unsigned alpha = 1;  // children per tree node
  std::function<void(const std::string&)> trace;
};

struct Phase2Stats {
  std::size_t small_initial = 0;
  std::size_t eliminated = 0;
  std::size_t attempts = 0;
  std::size_t retries = 0;  // attempts beyond the first on some cycle
  std::size_t early_closures = 0;
  std::size_t out_nodes = 0;
  std::size_t in_nodes = 0;
  std::size_t used_vertices = 0;
  std::size_t min_cycle = 0;
};

/// One small-cycle elimination attempt: break a root edge of the cycle, grow
/// the out-tree to at least nu leaves, then grow one in-tree of path starts
/// shared by all leaves until some leaf path can be closed.
class SmallCycleEliminator {
 public:
  struct Swap {
    std::vector<Vertex> removed_tails;  // cover edges (t, succ t) deleted
    std::vector<EdgeId> added;          // pool edges inserted
  };

  SmallCycleEliminator(const CycleCover& cover, std::span<const Edge> edges, const PoolAdjacency& pool,
                       const EdgeUsage& usage, UsedVertices& used, double n0, const Phase2Options& options,
                       Phase2Stats& stats)
      : cover_(cover),
        edges_(edges),
        pool_(pool),
        usage_(usage),
        used_(used),
        n0_(n0),
        options_(options),
        stats_(stats),
        ops_(cover.pd, n0) {}

  /// On success returns the edge swap that turns the cover into one with
  /// fewer small cycles. On failure returns why.
  std::variant<Swap, std::string> attempt(Vertex v0) {
    out_nodes_.clear();
    const Vertex u0 = cover_.pd.succ(v0);
    out_nodes_.push_back({npos, no_vertex, no_edge, ops_.initial(v0)});
    std::vector<std::size_t> level{0};
    std::vector<std::size_t> leaves;
    const std::size_t nu = std::max<std::size_t>(options_.budget.nu, 1);

    while (leaves.empty()) {
      used_.begin_level();
      std::vector<std::size_t> next_level;
      for (const std::size_t id : level) {
        const Vertex v = ops_.last(out_nodes_[id].state.path);
        unsigned children = 0;
        for (const EdgeId e : pool_.out(v)) {
          if (!usage_.free(e)) continue;
          const Vertex w = edges_[e].head;
          if (w == u0) {
            if (static_cast<double>(out_nodes_[id].state.path_length) >= n0_) {
              ++stats_.early_closures;
              used_.add(v);
              used_.add(w);
              return out_swap(v0, id, e);
            }
            continue;
          }
          const Vertex x = cover_.pd.pred(w);
          if (!used_.usable(w) || !used_.usable(x)) continue;
          detail::Npd child;
          const auto step = ops_.out_step(out_nodes_[id].state, w, child);
          if (step != detail::StepResult::accepted) continue;
          // W holds the endpoints of edges actually added; rejected candidates cost nothing.
          used_.add(v);
          used_.add(w);
          if (used_.size() > options_.budget.w_cap) return std::string("used-vertex cap reached in out-phase");
          out_nodes_.push_back({id, w, e, std::move(child)});
          ++stats_.out_nodes;
          next_level.push_back(out_nodes_.size() - 1);
          if (next_level.size() >= nu) break;
          if (++children >= options_.alpha) break;
        }
        if (next_level.size() >= nu) break;
      }
      if (next_level.empty()) return std::string("out-phase stalled");
      if (next_level.size() >= nu) leaves = std::move(next_level);
      else level = std::move(next_level);
    }
    leaves_ = leaves;
    return in_phase(v0, u0);
  }

  std::size_t leaf_count() const { return leaves_.size(); }
  std::size_t in_tree_size() const { return in_nodes_.size(); }

 private:
  static constexpr std::size_t npos = ~std::size_t{0};

  struct OutNode {
    std::size_t parent;
    Vertex head;  // w of the added edge (end, w)
    EdgeId edge;
    detail::Npd state;
  };

  struct InNode {
    std::size_t parent;
    Vertex tail;   // w of the added edge (w, start)
    Vertex start;  // path start after the step
    EdgeId edge;
  };

  std::variant<Swap, std::string> in_phase(Vertex v0, Vertex u0) {
    std::vector<std::pair<Vertex, std::size_t>> ends;
    for (const auto id : leaves_) ends.emplace_back(ops_.last(out_nodes_[id].state.path), id);
    std::sort(ends.begin(), ends.end());

    in_nodes_.clear();
    in_nodes_.push_back({npos, no_vertex, u0, no_edge});
    std::vector<std::size_t> level{0};
    const double log_n = std::log(std::max<double>(3.0, static_cast<double>(cover_.pd.vertex_count())));
    const auto node_cap = static_cast<std::size_t>(
        std::ceil(options_.alpha * static_cast<double>(std::max<std::size_t>(options_.budget.nu, 1)) * log_n));

    while (true) {
      used_.begin_level();
      std::vector<std::size_t> next_level;
      for (const std::size_t id : level) {
        const Vertex u = in_nodes_[id].start;
        unsigned children = 0;
        for (const EdgeId e : pool_.in(u)) {
          if (!usage_.free(e)) continue;
          const Vertex w = edges_[e].tail;
          auto range = std::equal_range(ends.begin(), ends.end(), std::pair<Vertex, std::size_t>{w, 0},
                                        [](const auto& a, const auto& b) { return a.first < b.first; });
          for (auto it = range.first; it != range.second; ++it) {
            if (auto swap = try_close(v0, it->second, id, e)) {
              used_.add(w);
              used_.add(u);
              return std::move(*swap);
            }
          }
          const Vertex x = cover_.pd.succ(w);
          if (x == u || !used_.usable(w) || !used_.usable(x)) continue;
          used_.add(u);
          used_.add(w);
          if (used_.size() > options_.budget.w_cap) return std::string("used-vertex cap reached in in-phase");
          in_nodes_.push_back({id, w, x, e});
          ++stats_.in_nodes;
          next_level.push_back(in_nodes_.size() - 1);
          if (in_nodes_.size() > node_cap) return std::string("in-phase node cap reached");
          if (++children >= options_.alpha) break;
        }
      }
      if (next_level.empty()) return std::string("in-phase stalled");
      level = std::move(next_level);
    }
  }

  /// Replays the in-tree chain ending at `in_id` on leaf `leaf`, enforcing
  /// the length conditions for that leaf, then closes with edge `closing`.
  std::optional<Swap> try_close(Vertex v0, std::size_t leaf, std::size_t in_id, EdgeId closing) {
    std::vector<std::size_t> chain;
    for (std::size_t id = in_id; in_nodes_[id].parent != npos; id = in_nodes_[id].parent) chain.push_back(id);
    std::reverse(chain.begin(), chain.end());
    detail::Npd state = out_nodes_[leaf].state;
    for (const auto id : chain) {
      detail::Npd next;
      if (ops_.in_step(state, in_nodes_[id].tail, next) != detail::StepResult::accepted) return std::nullopt;
      if (ops_.first(next.path) != in_nodes_[id].start) return std::nullopt;
      state = std::move(next);
    }
    detail::Npd unused;
    if (ops_.first(state.path) != edges_[closing].head) return std::nullopt;
    if (ops_.in_step(state, edges_[closing].tail, unused) != detail::StepResult::closes) return std::nullopt;

    Swap swap = out_swap(v0, leaf, closing);
    for (const auto id : chain) {
      swap.removed_tails.push_back(in_nodes_[id].tail);
      swap.added.push_back(in_nodes_[id].edge);
    }
    return swap;
  }

  /// The out-tree chain to node `id`, closed by `closing`.
  Swap out_swap(Vertex v0, std::size_t id, EdgeId closing) const {
    Swap swap;
    swap.removed_tails.push_back(v0);
    for (; out_nodes_[id].parent != npos; id = out_nodes_[id].parent) {
      swap.removed_tails.push_back(cover_.pd.pred(out_nodes_[id].head));
      swap.added.push_back(out_nodes_[id].edge);
    }
    swap.added.push_back(closing);
    return swap;
  }

  const CycleCover& cover_;
  std::span<const Edge> edges_;
  const PoolAdjacency& pool_;
  const EdgeUsage& usage_;
  UsedVertices& used_;
  double n0_;
  const Phase2Options& options_;
  Phase2Stats& stats_;
  detail::NpdOps ops_;
  std::vector<OutNode> out_nodes_;
  std::vector<std::size_t> leaves_;
  std::vector<InNode> in_nodes_;
};

/// Applies an edge swap to a cover and checks that the small cycles of the
/// result are small cycles of the input, strictly fewer of them.
inline CycleCover apply_swap(const CycleCover& cover, std::span<const Edge> edges,
                             const SmallCycleEliminator::Swap& swap, unsigned index, EdgeUsage& usage, double n0) {
  std::vector<Vertex> succ = cover.pd.successors();
  std::vector<EdgeId> edge_of = cover.edge_of;
  for (const Vertex t : swap.removed_tails) {
    if (succ[t] == no_vertex) throw Error(ErrorCode::contract_violation, "cover edge removed twice");
    succ[t] = no_vertex;
  }
  for (const EdgeId e : swap.added) {
    const Edge& edge = edges[e];
    if (succ[edge.tail] != no_vertex) throw Error(ErrorCode::contract_violation, "two out-edges at one vertex");
    succ[edge.tail] = edge.head;
    edge_of[edge.tail] = e;
  }
  PermutationDigraph next(std::move(succ));

  const auto before = cover.pd.small_cycles(n0);
  const auto after = next.small_cycles(n0);
  if (after.size() >= before.size()) throw Error(ErrorCode::contract_violation, "small-cycle count did not drop");
  for (const auto id : after) {
    const auto cyc = next.cycle(id);
    const auto old = cover.pd.cycle_of(cyc.front());
    if (cover.pd.cycle_length(old) != cyc.size()) throw Error(ErrorCode::contract_violation, "new small cycle");
    for (const Vertex v : cyc) {
      if (cover.pd.cycle_of(v) != old) throw Error(ErrorCode::contract_violation, "new small cycle");
    }
  }
  for (const Vertex t : swap.removed_tails) usage.release(cover.edge_of[t]);
  for (const EdgeId e : swap.added) usage.take(e, index);
  return {std::move(next), std::move(edge_of)};
}

/// Removes every cycle shorter than n0 from the cover, largest first. A cycle
/// of length >= 4 gets two attempts with different broken edges, shorter
/// cycles one. `used` persists across the whole call.
inline Outcome<CycleCover> eliminate_small_cycles(CycleCover cover, unsigned index, std::span<const Edge> edges,
                                                  const PoolAdjacency& pool, EdgeUsage& usage, UsedVertices& used,
                                                  Rng& rng, const Phase2Options& options, Phase2Stats& stats) {
  const double n0 = min_cycle_length_target(cover.pd.vertex_count());
  stats.small_initial = cover.pd.small_cycles(n0).size();
  auto trace = [&](const std::string& line) {
    if (options.trace) options.trace(line);
  };
  while (true) {
    const auto small = cover.pd.small_cycles(n0);
    if (small.empty()) break;
    std::uint32_t target = small.front();
    for (const auto id : small) {
      if (cover.pd.cycle_length(id) > cover.pd.cycle_length(target)) target = id;
    }
    const std::size_t len = cover.pd.cycle_length(target);
    const unsigned budget = len >= 4 ? 2 : 1;
    std::vector<std::size_t> tried;
    std::optional<SmallCycleEliminator::Swap> done;
    std::string last_reason;
    for (unsigned attempt = 1; attempt <= budget && !done; ++attempt) {
      std::size_t pos = 0;
      do {
        pos = rng.below(len);
      } while (std::find(tried.begin(), tried.end(), pos) != tried.end());
      tried.push_back(pos);
      const Vertex v0 = cover.pd.cycle(target)[pos];
      ++stats.attempts;
      if (attempt > 1) ++stats.retries;
      SmallCycleEliminator eliminator(cover, edges, pool, usage, used, n0, options, stats);
      auto result = eliminator.attempt(v0);
      std::ostringstream line;
      line << "index=" << index << " cycle=" << target << " length=" << len << " attempt=" << attempt
           << " leaves=" << eliminator.leaf_count() << " in_nodes=" << eliminator.in_tree_size()
           << " used=" << used.size();
      if (auto* swap = std::get_if<SmallCycleEliminator::Swap>(&result)) {
        line << " outcome=ok added=" << swap->added.size();
        done = std::move(*swap);
      } else {
        last_reason = std::get<std::string>(result);
        line << " outcome=fail reason=\"" << last_reason << '"';
      }
      trace(line.str());
    }
    if (!done) {
      stats.used_vertices = used.size();
      return PhaseFailure{"2", index, "cycle of length " + std::to_string(len) + ": " + last_reason};
    }
    cover = apply_swap(cover, edges, *done, index, usage, n0);
    ++stats.eliminated;
  }
  stats.used_vertices = used.size();
  stats.min_cycle = cover.pd.min_cycle_length();
  if (static_cast<double>(stats.min_cycle) < n0) throw Error(ErrorCode::contract_violation, "small cycle survived");
  return cover;
}

}  // namespace hampack
