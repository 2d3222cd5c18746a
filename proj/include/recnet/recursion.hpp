#pragma once

// Structured recursion over one-level shapes.
//
// A shape is a class template S<K> whose K-typed members are the recursive
// slots. Every shape supplies two functions, found by argument-dependent
// lookup:
//
//   fmap(f, const S<K>& s)          -> S<L>   applies f to each slot
//   for_each_slot(f, const S<K>& s) -> void   visits each slot by const ref
//
// Both must visit the slots in the same (declaration) order. Fix<S> closes a
// shape under recursion; Program<S, A> does the same but also allows Pure
// leaves carrying an A, which is what makes sequencing possible.
//
// fold/unfold/eval/build never recurse on the C++ stack: they run on explicit
// work lists, so a ten-thousand-node list costs heap, not stack. Destroying a
// deep Fix or Program is iterative for the same reason.

#include <algorithm>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "recnet/errors.hpp"

namespace recnet {

// The unit type: the leaf carried by smart-constructed network fragments.
struct Unit {
  friend bool operator==(Unit, Unit) = default;
};

inline constexpr std::size_t kDefaultDepthLimit = 1'000'000;

namespace detail {

template <class Node>
std::size_t slot_count(const Node& node) {
  std::size_t n = 0;
  for_each_slot([&n](const auto&) { ++n; }, node);
  return n;
}

// Strips the slots, leaving only the non-recursive payload of a layer.
template <class Node>
auto shell(const Node& node) {
  return fmap([](const auto&) { return Unit{}; }, node);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Fix

template <template <class> class S>
class Fix {
 public:
  using Node = S<Fix>;
  template <class K>
  using Shape = S<K>;

  explicit Fix(Node node) : node_(std::make_shared<const Node>(std::move(node))) {}

  Fix(const Fix&) = default;
  Fix(Fix&&) noexcept = default;
  Fix& operator=(const Fix& other) {
    release(std::exchange(node_, other.node_));
    return *this;
  }
  Fix& operator=(Fix&& other) noexcept {
    release(std::exchange(node_, std::move(other.node_)));
    return *this;
  }
  ~Fix() { release(std::move(node_)); }

  const Node& unwrap() const { return *node_; }

  // Never null for a live value; a Fix has no leaves other than zero-slot shapes.
  const Node* node() const { return node_.get(); }

 private:
  static void release(std::shared_ptr<const Node> top) noexcept {
    std::vector<std::shared_ptr<const Node>> pending;
    for (;;) {
      if (top && top.use_count() == 1) {
        for_each_slot(
            [&pending](const Fix& child) {
              if (child.node_) pending.push_back(child.node_);
            },
            *top);
      }
      top.reset();
      if (pending.empty()) return;
      top = std::move(pending.back());
      pending.pop_back();
    }
  }

  std::shared_ptr<const Node> node_;
};

template <template <class> class S>
Fix<S> wrap(S<Fix<S>> node) {
  return Fix<S>(std::move(node));
}

template <template <class> class S>
const S<Fix<S>>& unwrap(const Fix<S>& t) {
  return t.unwrap();
}

// ---------------------------------------------------------------------------
// Program (the free monad over a shape)

template <template <class> class S, class A>
class Program {
 public:
  using Node = S<Program>;
  using Leaf = A;
  template <class K>
  using Shape = S<K>;

  static Program pure(A value) { return Program(std::in_place_index<0>, std::move(value)); }
  static Program step(Node node) {
    return Program(std::in_place_index<1>, std::make_shared<const Node>(std::move(node)));
  }

  Program(const Program&) = default;
  Program(Program&&) noexcept = default;
  Program& operator=(const Program& other) {
    Program old(std::move(*this));
    rep_ = other.rep_;
    return *this;
  }
  Program& operator=(Program&& other) noexcept {
    Program old(std::move(*this));
    rep_ = std::move(other.rep_);
    return *this;
  }
  ~Program() {
    if (auto* p = std::get_if<1>(&rep_)) release(std::move(*p));
  }

  bool is_pure() const { return rep_.index() == 0; }
  const A* leaf() const { return std::get_if<0>(&rep_); }
  const Node* node() const {
    const auto* p = std::get_if<1>(&rep_);
    return p ? p->get() : nullptr;
  }

 private:
  template <class... Args>
  explicit Program(Args&&... args) : rep_(std::forward<Args>(args)...) {}

  static void release(std::shared_ptr<const Node> top) noexcept {
    std::vector<std::shared_ptr<const Node>> pending;
    for (;;) {
      if (top && top.use_count() == 1) {
        for_each_slot(
            [&pending](const Program& child) {
              if (const auto* p = std::get_if<1>(&child.rep_); p && *p) pending.push_back(*p);
            },
            *top);
      }
      top.reset();
      if (pending.empty()) return;
      top = std::move(pending.back());
      pending.pop_back();
    }
  }

  std::variant<A, std::shared_ptr<const Node>> rep_;
};

// ---------------------------------------------------------------------------
// Traversal engines

namespace detail {

// Post-order evaluation with an explicit stack. Each finished subterm leaves
// one result on `results`; a node consumes its children's results in slot
// order.
template <class R, class T, class OnLeaf, class OnNode>
R postorder(const T& root, OnLeaf& on_leaf, OnNode& on_node) {
  struct Frame {
    const T* term;
    bool expanded;
  };
  std::vector<Frame> todo{{&root, false}};
  std::vector<R> results;
  std::vector<const T*> children;
  while (!todo.empty()) {
    const Frame frame = todo.back();
    todo.pop_back();
    const auto* node = frame.term->node();
    if (node == nullptr) {
      results.push_back(on_leaf(*frame.term));
      continue;
    }
    if (!frame.expanded) {
      todo.push_back({frame.term, true});
      children.clear();
      for_each_slot([&children](const T& child) { children.push_back(&child); }, *node);
      for (auto it = children.rbegin(); it != children.rend(); ++it) todo.push_back({*it, false});
      continue;
    }
    const std::size_t base = results.size() - slot_count(*node);
    std::size_t next = base;
    R value = on_node(fmap([&](const T&) -> R { return std::move(results[next++]); }, *node));
    results.erase(results.begin() + static_cast<std::ptrdiff_t>(base), results.end());
    results.push_back(std::move(value));
  }
  return std::move(results.back());
}

// Top-down generation. Phase one runs the coalgebra over the whole
// structure, recording each layer with its children replaced by ids; phase
// two assembles terms bottom-up (children always carry larger ids).
template <class T, class Coalg, class Seed, class Wrap>
T generate(Coalg& coalg, Seed seed, std::size_t depth_limit, Wrap wrap) {
  using Layer = std::invoke_result_t<Coalg&, Seed>;
  using IdLayer =
      decltype(fmap(std::declval<std::size_t (*)(const Seed&)>(), std::declval<const Layer&>()));
  struct Pending {
    Seed seed;
    std::size_t id;
    std::size_t depth;
  };

  std::vector<std::optional<IdLayer>> layers(1);
  std::vector<Pending> todo;
  todo.push_back({std::move(seed), 0, 0});
  while (!todo.empty()) {
    Pending item = std::move(todo.back());
    todo.pop_back();
    if (item.depth >= depth_limit) {
      throw DepthExceeded("unfold exceeded depth limit " + std::to_string(depth_limit));
    }
    const Layer layer = coalg(std::move(item.seed));
    const std::size_t first_child = todo.size();
    IdLayer ids = fmap(
        [&](const Seed& child) -> std::size_t {
          const std::size_t id = layers.size();
          layers.emplace_back();
          todo.push_back({child, id, item.depth + 1});
          return id;
        },
        layer);
    std::reverse(todo.begin() + static_cast<std::ptrdiff_t>(first_child), todo.end());
    layers[item.id] = std::move(ids);
  }

  std::vector<std::optional<T>> built(layers.size());
  for (std::size_t id = layers.size(); id-- > 0;) {
    built[id].emplace(wrap(fmap(
        [&built](std::size_t child) -> T {
          T term = std::move(*built[child]);
          built[child].reset();
          return term;
        },
        *layers[id])));
    layers[id].reset();
  }
  return std::move(*built.front());
}

}  // namespace detail

// Catamorphism: algebra(fmap(fold(algebra), unwrap(t))), innermost first.
template <class R, template <class> class S, class Alg>
R fold(Alg&& algebra, const Fix<S>& t) {
  auto on_leaf = [](const Fix<S>&) -> R { throw MalformedStack("Fix term without a node"); };
  auto on_node = [&algebra](S<R> layer) -> R { return algebra(std::move(layer)); };
  return detail::postorder<R>(t, on_leaf, on_node);
}

// Anamorphism: wrap(fmap(unfold(coalgebra), coalgebra(seed))).
// Throws DepthExceeded once a path grows past depth_limit wraps.
template <template <class> class S, class Coalg, class Seed>
Fix<S> unfold(Coalg&& coalgebra, Seed seed, std::size_t depth_limit = kDefaultDepthLimit) {
  return detail::generate<Fix<S>>(coalgebra, std::move(seed), depth_limit,
                                  [](S<Fix<S>> node) { return Fix<S>(std::move(node)); });
}

// Fold over a program: Pure leaves go through the generator, steps through
// the algebra.
template <class R, template <class> class S, class A, class Alg, class Gen>
R eval(Alg&& algebra, Gen&& generator, const Program<S, A>& program) {
  auto on_leaf = [&generator](const Program<S, A>& p) -> R { return generator(*p.leaf()); };
  auto on_node = [&algebra](S<R> layer) -> R { return algebra(std::move(layer)); };
  return detail::postorder<R>(program, on_leaf, on_node);
}

// Unfold into a program. Generation stops only at zero-slot shapes, so the
// result has no Pure leaves and the leaf type A is free.
template <template <class> class S, class A = Unit, class Coalg, class Seed>
Program<S, A> build(Coalg&& coalgebra, Seed seed, std::size_t depth_limit = kDefaultDepthLimit) {
  return detail::generate<Program<S, A>>(
      coalgebra, std::move(seed), depth_limit,
      [](S<Program<S, A>> node) { return Program<S, A>::step(std::move(node)); });
}

// Monadic bind: every Pure a becomes continuation(a); the Step spine above
// the leaves is rebuilt unchanged.
template <template <class> class S, class A, class K>
auto sequence(const Program<S, A>& program, K&& continuation)
    -> std::invoke_result_t<K&, const A&> {
  using Out = std::invoke_result_t<K&, const A&>;
  return eval<Out>([](typename Out::Node node) { return Out::step(std::move(node)); },
                   [&continuation](const A& value) -> Out { return continuation(value); }, program);
}

// `first >> second`: sequence, discarding the first program's leaf values.
template <template <class> class S, class A, class B>
Program<S, B> then(const Program<S, A>& first, const Program<S, B>& second) {
  return sequence(first, [&second](const A&) { return second; });
}

template <template <class> class S, class A = Unit>
Program<S, A> to_program(const Fix<S>& t) {
  return fold<Program<S, A>>(
      [](S<Program<S, A>> node) { return Program<S, A>::step(std::move(node)); }, t);
}

// Inverse of to_program on Pure-free programs; nullopt if any leaf is Pure.
template <template <class> class S, class A>
std::optional<Fix<S>> to_fix(const Program<S, A>& program) {
  using Maybe = std::optional<Fix<S>>;
  return eval<Maybe>(
      [](S<Maybe> node) -> Maybe {
        bool complete = true;
        for_each_slot([&complete](const Maybe& m) { complete = complete && m.has_value(); }, node);
        if (!complete) return std::nullopt;
        return Fix<S>(fmap([](const Maybe& m) { return *m; }, node));
      },
      [](const A&) -> Maybe { return std::nullopt; }, program);
}

// ---------------------------------------------------------------------------
// Structural equality (iterative; shared subterms short-circuit)

template <template <class> class S>
bool operator==(const Fix<S>& a, const Fix<S>& b) {
  std::vector<std::pair<const Fix<S>*, const Fix<S>*>> todo{{&a, &b}};
  std::vector<const Fix<S>*> left, right;
  while (!todo.empty()) {
    auto [x, y] = todo.back();
    todo.pop_back();
    if (x->node() == y->node()) continue;
    if (!(detail::shell(x->unwrap()) == detail::shell(y->unwrap()))) return false;
    left.clear();
    right.clear();
    for_each_slot([&left](const Fix<S>& c) { left.push_back(&c); }, x->unwrap());
    for_each_slot([&right](const Fix<S>& c) { right.push_back(&c); }, y->unwrap());
    for (std::size_t i = 0; i < left.size(); ++i) todo.emplace_back(left[i], right[i]);
  }
  return true;
}

template <template <class> class S, class A>
bool operator==(const Program<S, A>& a, const Program<S, A>& b) {
  std::vector<std::pair<const Program<S, A>*, const Program<S, A>*>> todo{{&a, &b}};
  std::vector<const Program<S, A>*> left, right;
  while (!todo.empty()) {
    auto [x, y] = todo.back();
    todo.pop_back();
    const auto* nx = x->node();
    const auto* ny = y->node();
    if (nx == nullptr || ny == nullptr) {
      if (nx != ny) return false;
      if (!(*x->leaf() == *y->leaf())) return false;
      continue;
    }
    if (nx == ny) continue;
    if (!(detail::shell(*nx) == detail::shell(*ny))) return false;
    left.clear();
    right.clear();
    for_each_slot([&left](const Program<S, A>& c) { left.push_back(&c); }, *nx);
    for_each_slot([&right](const Program<S, A>& c) { right.push_back(&c); }, *ny);
    for (std::size_t i = 0; i < left.size(); ++i) todo.emplace_back(left[i], right[i]);
  }
  return true;
}

// ---------------------------------------------------------------------------
// Banana split

// Runs two algebras side by side over a layer of pairs.
template <template <class> class S, class AlgB, class AlgC>
auto pair_algebra(AlgB alg_b, AlgC alg_c) {
  return [alg_b = std::move(alg_b), alg_c = std::move(alg_c)]<class B, class C>(
             const S<std::pair<B, C>>& layer) -> std::pair<B, C> {
    B b = alg_b(fmap([](const std::pair<B, C>& bc) { return bc.first; }, layer));
    C c = alg_c(fmap([](const std::pair<B, C>& bc) { return bc.second; }, layer));
    return {std::move(b), std::move(c)};
  };
}

template <class GenB, class GenC>
auto pair_generator(GenB gen_b, GenC gen_c) {
  return [gen_b = std::move(gen_b), gen_c = std::move(gen_c)](const auto& a) {
    auto b = gen_b(a);
    auto c = gen_c(a);
    return std::pair<decltype(b), decltype(c)>(std::move(b), std::move(c));
  };
}

// ---------------------------------------------------------------------------
// Coproducts of shapes

template <template <class> class F, template <class> class G, class K>
struct Coproduct {
  std::variant<F<K>, G<K>> alt;

  bool is_left() const { return alt.index() == 0; }
  bool operator==(const Coproduct&) const = default;
};

template <template <class> class F, template <class> class G, class K>
Coproduct<F, G, K> left(F<K> x) {
  return {std::variant<F<K>, G<K>>(std::in_place_index<0>, std::move(x))};
}

template <template <class> class F, template <class> class G, class K>
Coproduct<F, G, K> right(G<K> x) {
  return {std::variant<F<K>, G<K>>(std::in_place_index<1>, std::move(x))};
}

// Applies `on_alt` to whichever summand is populated and rewraps the result
// on the same side. on_alt must map F<K> to F<L> and G<K> to G<L>.
template <class L, template <class> class F, template <class> class G, class K, class Fn>
Coproduct<F, G, L> map_summand(const Coproduct<F, G, K>& c, Fn&& on_alt) {
  using Alt = std::variant<F<L>, G<L>>;
  if (c.alt.index() == 0) return {Alt(std::in_place_index<0>, on_alt(std::get<0>(c.alt)))};
  return {Alt(std::in_place_index<1>, on_alt(std::get<1>(c.alt)))};
}

template <template <class> class F, template <class> class G, class K, class Fn>
auto fmap(Fn&& f, const Coproduct<F, G, K>& c) {
  using L = std::invoke_result_t<Fn&, const K&>;
  return map_summand<L>(c, [&f](const auto& alt) { return fmap(f, alt); });
}

template <template <class> class F, template <class> class G, class K, class Fn>
void for_each_slot(Fn&& f, const Coproduct<F, G, K>& c) {
  std::visit([&f](const auto& alt) { for_each_slot(f, alt); }, c.alt);
}

// Sum<F1, F2, ..., Fn>::type<K> nests right-associatively:
// Coproduct<F1, Coproduct<F2, ... Fn>>.
template <template <class> class... Fs>
struct Sum;

template <template <class> class F, template <class> class G>
struct Sum<F, G> {
  template <class K>
  using type = Coproduct<F, G, K>;
};

template <template <class> class F, template <class> class G, template <class> class H,
          template <class> class... Rest>
struct Sum<F, G, H, Rest...> {
  template <class K>
  using type = Coproduct<F, Sum<G, H, Rest...>::template type, K>;
};

// Membership (Sub :<: Sup) on concrete one-level types.
template <class Sub, class Sup>
struct is_member : std::is_same<Sub, Sup> {};

template <class Sub, template <class> class F, template <class> class G, class K>
struct is_member<Sub, Coproduct<F, G, K>>
    : std::bool_constant<std::is_same_v<Sub, Coproduct<F, G, K>> || is_member<Sub, F<K>>::value ||
                         is_member<Sub, G<K>>::value> {};

template <class Sub, class Sup>
concept MemberOf = is_member<Sub, Sup>::value;

namespace detail {
template <class T>
struct summands;
template <template <class> class F, template <class> class G, class K>
struct summands<Coproduct<F, G, K>> {
  using left = F<K>;
  using right = G<K>;
};
}  // namespace detail

// Injection searches left to right, so the leftmost matching summand wins.
template <class Sup, class Sub>
  requires MemberOf<Sub, Sup>
Sup inject(Sub x) {
  if constexpr (std::is_same_v<Sub, Sup>) {
    return x;
  } else {
    using L = typename detail::summands<Sup>::left;
    using R = typename detail::summands<Sup>::right;
    using Alt = decltype(Sup::alt);
    if constexpr (is_member<Sub, L>::value) {
      return Sup{Alt(std::in_place_index<0>, inject<L>(std::move(x)))};
    } else {
      return Sup{Alt(std::in_place_index<1>, inject<R>(std::move(x)))};
    }
  }
}

// Partial inverse of inject: a pointer to the Sub summand, or nullptr.
template <class Sub, class Sup>
  requires MemberOf<Sub, Sup>
const Sub* project(const Sup& s) {
  if constexpr (std::is_same_v<Sub, Sup>) {
    return &s;
  } else {
    using L = typename detail::summands<Sup>::left;
    using R = typename detail::summands<Sup>::right;
    if constexpr (is_member<Sub, L>::value) {
      if (s.alt.index() == 0) return project<Sub>(std::get<0>(s.alt));
    }
    if constexpr (is_member<Sub, R>::value) {
      if (s.alt.index() == 1) return project<Sub>(std::get<1>(s.alt));
    }
    return nullptr;
  }
}

// Op . inj: wraps one layer of a member shape as a whole term.
template <class Term, class Layer>
Term embed(Layer layer) {
  using Node = typename Term::Node;
  if constexpr (requires { Term::step(std::declval<Node>()); }) {
    return Term::step(inject<Node>(std::move(layer)));
  } else {
    return Term(inject<Node>(std::move(layer)));
  }
}

}  // namespace recnet
