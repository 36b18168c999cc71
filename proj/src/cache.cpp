#include "zosah/cache.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace zosah {

void EvalCache::reset(std::int64_t plan_id, std::size_t num_pairs) {
  plan_id_ = plan_id;
  pairs_.assign(num_pairs, {});
}

void EvalCache::record(std::int64_t plan_id, std::int64_t k, std::size_t pair,
                       std::span<const EvalRecord> records) {
  if (plan_id != plan_id_)
    throw PlanMismatch("EvalCache: record for plan " + std::to_string(plan_id) +
                       " but cache holds plan " + std::to_string(plan_id_));
  auto& store = pairs_.at(pair);
  std::erase_if(store, [k](const EvalRecord& r) { return r.step < k - 2; });
  for (auto r : records) {
    if (!std::isfinite(r.value)) throw NumericError("EvalCache: non-finite value");
    r.step = k;
    store.push_back(r);
  }
}

std::vector<EvalRecord> EvalCache::records(std::size_t pair, std::int64_t k, SampleKind kind) const {
  std::vector<EvalRecord> out;
  for (const auto& r : pairs_.at(pair))
    if (r.step == k && r.kind == kind) out.push_back(r);
  return out;
}

std::size_t EvalCache::size(std::size_t pair) const { return pairs_.at(pair).size(); }

}  // namespace zosah
