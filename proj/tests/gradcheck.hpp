#pragma once

#include <functional>
#include <vector>

#include "agformer/autodiff.hpp"
#include "oracles.hpp"

namespace testing {

// Max relative error between tape gradients and central differences over
// every entry of every listed parameter.
inline double gradcheck(const std::vector<agf::Parameter*>& params,
                        const std::function<agf::ad::Var(agf::ad::Tape&)>& build, double floor = 1e-6) {
  for (auto* p : params) p->zero_grad();
  {
    agf::ad::Tape tape;
    agf::ad::Var loss = build(tape);
    tape.backward(loss);
  }
  auto value = [&] {
    agf::ad::Tape tape;
    return build(tape).value()[0];
  };
  double worst = 0.0;
  for (auto* p : params) {
    const agf::Tensor numeric = oracle::numeric_grad(p->value, value);
    worst = std::max(worst, oracle::max_rel_error(p->grad, numeric, floor));
  }
  return worst;
}

}  // namespace testing
