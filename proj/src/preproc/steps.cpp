#include <array>
#include <cmath>

#include "nirs/csv.hpp"
#include "nirs/error.hpp"
#include "nirs/preproc.hpp"

namespace nirs::preproc {

namespace {

struct KindName {
  StepKind kind;
  std::string_view name;
};

constexpr std::array<KindName, 12> kKindNames{{
    {StepKind::none, "none"},
    {StepKind::asls, "asls"},
    {StepKind::savgol, "savgol"},
    {StepKind::gaussian, "gaussian"},
    {StepKind::snv, "snv"},
    {StepKind::emsc, "emsc"},
    {StepKind::haar, "haar"},
    {StepKind::area_norm, "area_norm"},
    {StepKind::osc, "osc"},
    {StepKind::pca, "pca"},
    {StepKind::standard_scale, "standard_scale"},
    {StepKind::minmax_scale, "minmax_scale"},
}};

std::string_view kind_name(StepKind k) {
  for (const auto& kn : kKindNames)
    if (kn.kind == k) return kn.name;
  return "?";
}

std::string fmt(double v) { return csv::format_double(v); }

std::vector<std::string_view> split_args(std::string_view args) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= args.size(); ++i) {
    if (i == args.size() || args[i] == ',') {
      out.push_back(args.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

double parse_num(std::string_view s, std::string_view step) {
  double v;
  if (!csv::parse_double(s, v) || !std::isfinite(v))
    throw ParameterError("bad numeric argument '" + std::string(s) + "' in step '" + std::string(step) + "'");
  return v;
}

int parse_int(std::string_view s, std::string_view step) {
  const double v = parse_num(s, step);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw ParameterError("integer expected, got '" + std::string(s) + "' in step '" + std::string(step) + "'");
  return static_cast<int>(v);
}

}  // namespace

StepSpec StepSpec::asls(double lambda, double p, int iters) {
  StepSpec s;
  s.kind = StepKind::asls;
  s.lambda = lambda;
  s.p = p;
  s.iters = iters;
  return s;
}

StepSpec StepSpec::savgol(int window, int polyorder, int deriv) {
  StepSpec s;
  s.kind = StepKind::savgol;
  s.window = window;
  s.polyorder = polyorder;
  s.deriv = deriv;
  return s;
}

StepSpec StepSpec::gaussian(double sigma) {
  StepSpec s;
  s.kind = StepKind::gaussian;
  s.sigma = sigma;
  return s;
}

StepSpec StepSpec::snv() {
  StepSpec s;
  s.kind = StepKind::snv;
  return s;
}

StepSpec StepSpec::emsc(int degree) {
  StepSpec s;
  s.kind = StepKind::emsc;
  s.degree = degree;
  return s;
}

StepSpec StepSpec::haar() {
  StepSpec s;
  s.kind = StepKind::haar;
  return s;
}

StepSpec StepSpec::area_norm() {
  StepSpec s;
  s.kind = StepKind::area_norm;
  return s;
}

StepSpec StepSpec::osc(int n_components) {
  StepSpec s;
  s.kind = StepKind::osc;
  s.n_components = n_components;
  return s;
}

StepSpec StepSpec::pca(double ratio) {
  StepSpec s;
  s.kind = StepKind::pca;
  s.ratio = ratio;
  return s;
}

StepSpec StepSpec::standard_scale() {
  StepSpec s;
  s.kind = StepKind::standard_scale;
  return s;
}

StepSpec StepSpec::minmax_scale() {
  StepSpec s;
  s.kind = StepKind::minmax_scale;
  return s;
}

StepCategory StepSpec::category() const {
  switch (kind) {
    case StepKind::none: return StepCategory::none;
    case StepKind::asls:
    case StepKind::savgol:
    case StepKind::gaussian: return StepCategory::baseline;
    case StepKind::snv:
    case StepKind::emsc: return StepCategory::scatter;
    case StepKind::haar:
    case StepKind::area_norm:
    case StepKind::osc:
    case StepKind::pca: return StepCategory::representation;
    case StepKind::standard_scale:
    case StepKind::minmax_scale: return StepCategory::scaling;
  }
  return StepCategory::none;
}

bool StepSpec::needs_fit() const {
  switch (kind) {
    case StepKind::emsc:
    case StepKind::osc:
    case StepKind::pca:
    case StepKind::standard_scale:
    case StepKind::minmax_scale: return true;
    default: return false;
  }
}

void StepSpec::validate() const {
  switch (kind) {
    case StepKind::savgol:
      if (window < 1 || window % 2 == 0) throw ParameterError("savgol window must be odd and positive");
      if (!(polyorder < window)) throw ParameterError("savgol window must exceed polyorder");
      if (!(polyorder >= deriv && deriv >= 0)) throw ParameterError("savgol needs polyorder >= deriv >= 0");
      break;
    case StepKind::asls:
      if (!(lambda > 0.0)) throw ParameterError("asls lambda must be > 0");
      if (!(p > 0.0 && p < 1.0)) throw ParameterError("asls p must lie in (0,1)");
      if (iters < 1) throw ParameterError("asls iterations must be >= 1");
      break;
    case StepKind::gaussian:
      if (!(sigma > 0.0)) throw ParameterError("gaussian sigma must be > 0");
      break;
    case StepKind::emsc:
      if (degree < 0) throw ParameterError("emsc degree must be >= 0");
      break;
    case StepKind::osc:
      if (n_components < 1) throw ParameterError("osc n_components must be >= 1");
      break;
    case StepKind::pca:
      if (!(ratio > 0.0 && ratio <= 1.0)) throw ParameterError("pca ratio must lie in (0,1]");
      break;
    default: break;
  }
}

std::string StepSpec::to_text() const {
  std::string name(kind_name(kind));
  switch (kind) {
    case StepKind::asls: return name + "(" + fmt(lambda) + "," + fmt(p) + "," + std::to_string(iters) + ")";
    case StepKind::savgol:
      return name + "(" + std::to_string(window) + "," + std::to_string(polyorder) + "," + std::to_string(deriv) + ")";
    case StepKind::gaussian: return name + "(" + fmt(sigma) + ")";
    case StepKind::emsc: return name + "(" + std::to_string(degree) + ")";
    case StepKind::osc: return name + "(" + std::to_string(n_components) + ")";
    case StepKind::pca: return name + "(" + fmt(ratio) + ")";
    default: return name;
  }
}

bool operator==(const StepSpec& a, const StepSpec& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case StepKind::asls: return a.lambda == b.lambda && a.p == b.p && a.iters == b.iters;
    case StepKind::savgol: return a.window == b.window && a.polyorder == b.polyorder && a.deriv == b.deriv;
    case StepKind::gaussian: return a.sigma == b.sigma;
    case StepKind::emsc: return a.degree == b.degree;
    case StepKind::osc: return a.n_components == b.n_components;
    case StepKind::pca: return a.ratio == b.ratio;
    default: return true;
  }
}

StepSpec parse_step(std::string_view text) {
  const std::size_t open = text.find('(');
  std::string_view name = text.substr(0, open);
  std::vector<std::string_view> args;
  if (open != std::string_view::npos) {
    if (text.back() != ')') throw ParameterError("unbalanced parentheses in step '" + std::string(text) + "'");
    args = split_args(text.substr(open + 1, text.size() - open - 2));
  }
  auto expect = [&](std::size_t n) {
    if (args.size() != n)
      throw ParameterError("step '" + std::string(text) + "' expects " + std::to_string(n) + " arguments");
  };

  StepKind kind = StepKind::none;
  bool known = false;
  for (const auto& kn : kKindNames)
    if (kn.name == name) {
      kind = kn.kind;
      known = true;
    }
  if (!known) throw ParameterError("unknown preprocessing step '" + std::string(name) + "'");

  StepSpec s;
  s.kind = kind;
  const bool bare = open == std::string_view::npos;
  switch (kind) {
    case StepKind::asls:
      if (!bare) {
        expect(3);
        s.lambda = parse_num(args[0], text);
        s.p = parse_num(args[1], text);
        s.iters = parse_int(args[2], text);
      }
      break;
    case StepKind::savgol:
      expect(3);
      s.window = parse_int(args[0], text);
      s.polyorder = parse_int(args[1], text);
      s.deriv = parse_int(args[2], text);
      break;
    case StepKind::gaussian:
      if (!bare) {
        expect(1);
        s.sigma = parse_num(args[0], text);
      }
      break;
    case StepKind::emsc:
      if (!bare) {
        expect(1);
        s.degree = parse_int(args[0], text);
      }
      break;
    case StepKind::osc:
      if (!bare) {
        expect(1);
        s.n_components = parse_int(args[0], text);
      }
      break;
    case StepKind::pca:
      if (!bare) {
        expect(1);
        s.ratio = parse_num(args[0], text);
      }
      break;
    default:
      if (!bare) expect(0);
  }
  s.validate();
  return s;
}

PipelineSpec::PipelineSpec(std::vector<StepSpec> s) {
  for (auto& step : s)
    if (step.kind != StepKind::none) steps.push_back(step);
}

std::string PipelineSpec::to_text() const {
  if (steps.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) out.push_back('>');
    out += steps[i].to_text();
  }
  return out;
}

PipelineSpec PipelineSpec::parse(std::string_view text) {
  std::vector<StepSpec> steps;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '>') {
      std::string_view part = text.substr(start, i - start);
      if (part.empty()) throw ParameterError("empty step in pipeline '" + std::string(text) + "'");
      steps.push_back(parse_step(part));
      start = i + 1;
    }
  }
  PipelineSpec p(std::move(steps));
  p.validate();
  return p;
}

void PipelineSpec::validate() const {
  int counts[5] = {0, 0, 0, 0, 0};
  for (const auto& s : steps) {
    s.validate();
    const int c = static_cast<int>(s.category());
    if (c != 0 && ++counts[c] > 1)
      throw ParameterError("pipeline '" + to_text() + "' has more than one step in the same slot");
  }
}

bool PipelineSpec::has_derivative() const {
  for (const auto& s : steps)
    if (s.derivative_order() >= 1) return true;
  return false;
}

PipelineSpec PipelineSpec::then(const PipelineSpec& tail) const {
  PipelineSpec out = *this;
  out.steps.insert(out.steps.end(), tail.steps.begin(), tail.steps.end());
  return out;
}

}  // namespace nirs::preproc
