#pragma once

#include "clverify/rewriting.hpp"

namespace clv {

// Satisfaction for tight sentences on finite configurations: c is a model
// exactly when some rewriting tree's canonical model is symmetric to c.

struct NotTight : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelsResult {
  enum class Verdict { Yes, No, BoundExhausted } verdict = Verdict::No;
  std::optional<RewritingTree> tree;        // Yes: matching tree
  std::optional<TypedRenaming> renaming;    // Yes: witness renaming
};

namespace detail {

// least components of each type (and each state) contributed by any complete
// derivation of a predicate (shortest-derivation fixpoint); prunes the search
struct MinContribution {
  static constexpr int kInf = 1 << 20;
  // keys: "T:" + component type and "S:" + state
  std::map<std::string, std::map<std::string, int>> per_pred;

  explicit MinContribution(const AnalyzedSpec& as) {
    std::vector<std::string> keys;
    for (auto& c : as.spec.signature.components) {
      keys.push_back("T:" + c.name);
      for (auto& q : c.states) keys.push_back("S:" + q);
    }
    for (auto& r : as.spec.sid.rules)
      for (auto& k : keys) per_pred[r.head][k] = kInf;
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto& r : as.spec.sid.rules) {
        NormalRule nv = normal_view(r, 0);
        for (auto& k : keys) {
          long own = 0;
          if (nv.component) {
            if (k == "T:" + nv.component->name) own = 1;
            if (nv.component->state && k == "S:" + *nv.component->state) own = 1;
          }
          long sum = own;
          for (auto* p : nv.predicates) {
            auto it = per_pred.find(p->name);
            sum += (it == per_pred.end()) ? kInf : it->second.at(k);
            if (sum >= kInf) { sum = kInf; break; }
          }
          int& slot = per_pred[r.head][k];
          if (sum < slot) {
            slot = (int)sum;
            changed = true;
          }
        }
      }
    }
  }

  int get(const std::string& pred, const std::string& key) const {
    auto it = per_pred.find(pred);
    if (it == per_pred.end()) return kInf;
    auto jt = it->second.find(key);
    return jt == it->second.end() ? 0 : jt->second;
  }
};

struct ModelsSearch {
  const AnalyzedSpec& as;
  const Configuration& target;
  const Signature& sig;
  int max_nodes;
  MinContribution mins;
  std::map<std::string, int> want;  // keyed like MinContribution: per type and per state
  std::map<std::string, int> have;
  std::vector<std::pair<Index, std::string>> slots;
  RewritingTree current;
  bool exhausted = false;
  ModelsResult result;

  ModelsSearch(const AnalyzedSpec& a, const Configuration& t, int mn)
      : as(a), target(t), sig(a.spec.signature), max_nodes(mn), mins(a) {
    for (auto& [type, set] : t.architecture.components) want["T:" + type] = (int)set.size();
    std::map<std::string, int> st;
    for (auto& p : t.marking) ++st[p.state];
    for (auto& c : sig.components)
      for (auto& q : c.states) want["S:" + q] = st.count(q) ? st[q] : 0;
  }

  // lower bound on the final per-type and per-state counts
  bool over_count(size_t qi) const {
    for (auto& [key, limit] : want) {
      long bound = have.count(key) ? have.at(key) : 0;
      for (size_t k = qi; k < slots.size(); ++k) bound += mins.get(slots[k].second, key);
      if (bound > limit) return true;
    }
    // any type outside the target must stay absent
    for (auto& [key, n] : have)
      if (n > 0 && !want.count(key)) return true;
    return false;
  }

  bool counts_match() const {
    for (auto& [key, n] : want)
      if (n != (have.count(key) ? have.at(key) : 0)) return false;
    for (auto& [key, n] : have)
      if (n != (want.count(key) ? want.at(key) : 0)) return false;
    return true;
  }

  // returns true to stop (found)
  bool go(size_t qi) {
    if (qi == slots.size()) {
      if (!counts_match()) return false;
      Configuration canon = canonical_model(current, as);
      if (auto f = find_symmetry(canon, target, sig)) {
        result.verdict = ModelsResult::Verdict::Yes;
        result.tree = current;
        result.renaming = *f;
        return true;
      }
      return false;
    }
    const auto [node, pred] = slots[qi];
    for (int ri : as.spec.sid.rules_of(pred)) {
      const Rule& r = as.spec.sid.rules[ri];
      int p = npred(r.body);
      int min_final = (int)qi + 2 + ((int)slots.size() - (int)qi - 1) + p;
      NormalRule nv = normal_view(r, ri);

      // apply tentatively, then prune on the count lower bounds
      current.label[node] = ri;
      if (nv.component) {
        ++have["T:" + nv.component->name];
        ++have["S:" + *nv.component->state];
      }
      size_t added = 0;
      auto [binders, matrix] = strip_exists(r.body);
      int child = 0;
      for (auto* a : atoms_of(*matrix)) {
        if (a->kind != ClKind::Predicate) continue;
        ++child;
        slots.push_back({index_child(node, child), a->name});
        ++added;
      }
      bool stop = false;
      if (!over_count(qi + 1)) {
        if (min_final > max_nodes)
          exhausted = true;  // the budget, not the component count, cut this branch
        else
          stop = go(qi + 1);
      }
      for (size_t k = 0; k < added; ++k) slots.pop_back();
      if (nv.component) {
        --have["T:" + nv.component->name];
        --have["S:" + *nv.component->state];
      }
      current.label.erase(node);
      if (stop) return true;
    }
    return false;
  }
};

}  // namespace detail

inline void require_tight(const SentenceQuery& q) {
  const AnalyzedSpec& as = q.analyzed;
  if (!as.normal_form.ok())
    throw NormalFormViolation("SID violates the rule normal form:\n" + as.normal_form.to_string());
  auto rep = check_tight(ClFormula::predicate(q.pred, {}), as.spec, as.profile);
  if (!rep.ok()) throw NotTight("sentence is not tight:\n" + rep.to_string());
}

inline ModelsResult models(const Configuration& c, const SentenceQuery& q, int max_nodes) {
  require_tight(q);
  auto tight = is_tight_architecture(c.architecture, q.analyzed.spec.signature);
  if (!tight.tight)
    throw NotTight("configuration is not a tight architecture (interaction " +
                   tight.witness->interaction + ")");
  detail::ModelsSearch s(q.analyzed, c, max_nodes);
  for (int root : q.roots) {
    const Rule& r = q.analyzed.spec.sid.rules[root];
    NormalRule nv = normal_view(r, root);
    s.current.label[{}] = root;
    if (nv.component) {
      ++s.have["T:" + nv.component->name];
      ++s.have["S:" + *nv.component->state];
    }
    auto [binders, matrix] = strip_exists(r.body);
    int child = 0;
    for (auto* a : atoms_of(*matrix)) {
      if (a->kind != ClKind::Predicate) continue;
      ++child;
      s.slots.push_back({index_child({}, child), a->name});
    }
    bool stop = false;
    if (!s.over_count(0)) {
      if (1 + (int)s.slots.size() > max_nodes)
        s.exhausted = true;
      else
        stop = s.go(0);
    }
    s.slots.clear();
    s.have.clear();
    s.current.label.clear();
    if (stop) return s.result;
  }
  ModelsResult r;
  r.verdict = s.exhausted ? ModelsResult::Verdict::BoundExhausted : ModelsResult::Verdict::No;
  return r;
}

inline ModelsResult models(const Configuration& c, const ClFormula& sentence,
                           const AnalyzedSpec& as, int max_nodes) {
  return models(c, make_query(as, sentence), max_nodes);
}

inline ModelsResult models(const Configuration& c, const std::string& sentenceName,
                           const AnalyzedSpec& as, int max_nodes) {
  return models(c, make_query(as, sentenceName), max_nodes);
}

}  // namespace clv
