// Copyright 2026 The SkimNet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "skimnet/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "skimnet/error.hpp"

namespace skimnet::numerics {

namespace {

double evaluate(const LossBuilder& loss) {
  Graph g(false);
  const double v = loss(g).value()[0];
  if (!std::isfinite(v)) throw Error(ErrorCategory::kEvaluation, "finite_diff_check: loss evaluated to a non-finite value");
  return v;
}

}  // namespace

GradCheckReport finite_diff_check(const LossBuilder& loss, ParamStore& params, double eps, double tol,
                                  const std::vector<std::string>& only) {
  if (!(eps > 0.0)) throw ValidationError("finite_diff_check: eps must be positive");
  GradCheckReport report;
  report.tolerance = tol;

  params.zero_grad();
  {
    Graph g(true);
    Var l = loss(g);
    if (!std::isfinite(l.value()[0])) {
      throw Error(ErrorCategory::kEvaluation, "finite_diff_check: loss evaluated to a non-finite value");
    }
    g.backward(l);
  }

  for (const std::string& name : params.names()) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Param& p = params.get(name);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + eps;
      const double up = evaluate(loss);
      p.value[i] = saved - eps;
      const double down = evaluate(loss);
      p.value[i] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p.grad[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic - numeric) / denom;
      ++report.entries_checked;
      if (report.entries_checked == 1 || rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = name;
        report.worst_index = i;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_rel_error < tol;
  return report;
}

}  // namespace skimnet::numerics
