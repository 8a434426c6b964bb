#include <sstream>

#include "nirs/error.hpp"
#include "nirs/search.hpp"

namespace nirs::search {

using preproc::PipelineSpec;
using preproc::StepSpec;

namespace {

std::vector<StepSpec> tabular_baselines() {
  return {StepSpec::none(),         StepSpec::asls(),          StepSpec::savgol(11, 2, 1), StepSpec::savgol(15, 2, 1),
          StepSpec::savgol(21, 2, 1), StepSpec::savgol(15, 3, 2), StepSpec::savgol(21, 3, 2)};
}

std::vector<StepSpec> scatter_options() { return {StepSpec::none(), StepSpec::snv(), StepSpec::emsc()}; }

}  // namespace

SearchSpace SearchSpace::tabular() {
  SearchSpace s;
  s.family = SearchFamily::tabular;
  s.phase1_baseline = tabular_baselines();
  s.phase1_scatter = scatter_options();
  s.phase2_repr = {StepSpec::none(), StepSpec::pca(0.25), StepSpec::osc(1)};
  return s;
}

SearchSpace SearchSpace::linear() {
  SearchSpace s;
  s.family = SearchFamily::linear;
  s.phase1_baseline = tabular_baselines();
  s.phase1_baseline.push_back(StepSpec::gaussian());
  s.phase1_scatter = scatter_options();
  s.phase2_repr = {StepSpec::none(), StepSpec::haar(), StepSpec::area_norm(), StepSpec::osc(1)};
  s.phase2_scale = {StepSpec::none(), StepSpec::standard_scale(), StepSpec::minmax_scale()};
  return s;
}

SearchSpace SearchSpace::for_family(SearchFamily f) {
  switch (f) {
    case SearchFamily::linear: return linear();
    case SearchFamily::tabular: return tabular();
    case SearchFamily::automatic: break;
  }
  throw ParameterError("search space family must be linear or tabular");
}

std::vector<PipelineSpec> enumerate_phase1(const SearchSpace& space) {
  std::vector<PipelineSpec> out;
  for (const auto& b : space.phase1_baseline)
    for (const auto& s : space.phase1_scatter) out.emplace_back(std::vector<StepSpec>{b, s});
  return out;
}

std::vector<PipelineSpec> expand_phase2(const std::vector<PipelineSpec>& top, const SearchSpace& space) {
  if (top.empty()) throw ParameterError("phase 2 needs at least one retained pipeline");
  if (static_cast<int>(top.size()) > space.top_k)
    throw ParameterError("phase 2 received more pipelines than top_k");
  const std::vector<StepSpec> scales = space.phase2_scale.empty() ? std::vector<StepSpec>{StepSpec::none()}
                                                                  : space.phase2_scale;
  std::vector<PipelineSpec> out;
  for (const auto& base : top)
    for (const auto& r : space.phase2_repr)
      for (const auto& sc : scales) out.push_back(base.then(PipelineSpec({r, sc})));
  return out;
}

SearchCounts planned_counts(const SearchSpace& space, int folds, int configs_per_pipeline) {
  SearchCounts c;
  c.phase1_pipelines = space.phase1_baseline.size() * space.phase1_scatter.size();
  const std::size_t scales = space.phase2_scale.empty() ? 1 : space.phase2_scale.size();
  const std::size_t retained = std::min<std::size_t>(static_cast<std::size_t>(space.top_k), c.phase1_pipelines);
  c.phase2_pipelines = retained * space.phase2_repr.size() * scales;
  c.cached_pipelines = retained;  // the none x none expansion of each retained pipeline
  c.folds = folds;
  c.configs_per_pipeline = configs_per_pipeline;
  return c;
}

std::string list_pipelines(SearchFamily family) {
  const SearchSpace space = SearchSpace::for_family(family);
  const auto p1 = enumerate_phase1(space);
  std::ostringstream os;
  os << "family: " << to_string(family) << "\n";
  os << "phase1: " << space.phase1_baseline.size() << " x " << space.phase1_scatter.size() << " = " << p1.size()
     << "\n";
  for (const auto& p : p1) os << p.to_text() << "\n";
  os << "phase2: top-" << space.top_k << " × " << space.phase2_repr.size();
  if (!space.phase2_scale.empty()) os << " × " << space.phase2_scale.size();
  os << "\n";
  os << "  representation: ";
  for (std::size_t i = 0; i < space.phase2_repr.size(); ++i)
    os << (i ? ", " : "") << space.phase2_repr[i].to_text();
  os << "\n";
  if (!space.phase2_scale.empty()) {
    os << "  scaling: ";
    for (std::size_t i = 0; i < space.phase2_scale.size(); ++i)
      os << (i ? ", " : "") << space.phase2_scale[i].to_text();
    os << "\n";
  }
  const SearchCounts c = planned_counts(space, 3, 1);
  os << "total pipelines: " << c.total_pipelines() << "\n";
  return os.str();
}

}  // namespace nirs::search
