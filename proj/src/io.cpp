#include "ergocert/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "ergocert/error.hpp"

namespace ergocert::io {

namespace {

void require_keys(const json& obj, const std::set<std::string>& allowed, std::string_view where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ValidationError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

double number(const json& v, std::string_view what) {
  if (!v.is_number()) throw ValidationError(std::string(what) + " must be a number");
  return v.get<double>();
}

Eigen::VectorXd vector_field(const json& v, std::string_view what) {
  if (!v.is_array() || v.empty()) throw ValidationError(std::string(what) + " must be a non-empty array");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = number(v[i], what);
  return out;
}

Eigen::MatrixXd matrix_field(const json& v, std::string_view what) {
  if (!v.is_array() || v.empty()) throw ValidationError(std::string(what) + " must be a non-empty array of rows");
  const std::size_t n = v.size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!v[i].is_array() || v[i].size() != n) throw ValidationError(std::string(what) + " must be square");
    for (std::size_t j = 0; j < n; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = number(v[i][j], what);
  }
  return out;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

json complex_json(const std::vector<std::complex<double>>& zs) {
  json out = json::array();
  for (const auto& z : zs) out.push_back(json::array({z.real(), z.imag()}));
  return out;
}

json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

}  // namespace

Model parse_model(const json& doc) {
  if (!doc.is_object()) throw ValidationError("model file must be a JSON object");
  require_keys(doc, {"kind", "weights", "rates", "step", "pdmp"}, "model file");
  if (!doc.contains("kind") || !doc["kind"].is_string()) throw ValidationError("missing string field 'kind'");
  const std::string kind = doc["kind"].get<std::string>();

  const char* payloads[] = {"rates", "step", "pdmp"};
  const char* expected = kind == "ctmc" ? "rates" : kind == "dtmc" ? "step" : kind == "pdmp" ? "pdmp" : nullptr;
  if (!expected) throw ValidationError("unknown kind '" + kind + "'");
  for (const char* p : payloads) {
    if (std::string_view(p) == expected) {
      if (!doc.contains(p)) throw ValidationError("kind '" + kind + "' needs field '" + p + "'");
    } else if (doc.contains(p)) {
      throw ValidationError("field '" + std::string(p) + "' does not belong to kind '" + kind + "'");
    }
  }

  std::optional<Eigen::VectorXd> weights;
  if (doc.contains("weights")) weights = vector_field(doc["weights"], "weights");

  if (kind == "pdmp") {
    const json& p = doc["pdmp"];
    if (!p.is_object()) throw ValidationError("'pdmp' must be an object");
    require_keys(p, {"n", "jump_rate", "jump_target"}, "pdmp");
    for (const char* k : {"n", "jump_rate", "jump_target"})
      if (!p.contains(k)) throw ValidationError(std::string("pdmp needs field '") + k + "'");
    if (!p["n"].is_number_integer() || p["n"].get<long long>() < 1)
      throw ValidationError("pdmp.n must be a positive integer");
    const auto n = static_cast<std::size_t>(p["n"].get<long long>());
    const Eigen::VectorXd target = vector_field(p["jump_target"], "pdmp.jump_target");
    if (static_cast<std::size_t>(target.size()) != n) throw ValidationError("pdmp.jump_target must have n entries");
    if (weights && (static_cast<std::size_t>(weights->size()) != n || (weights->array() != 1.0).any()))
      throw ValidationError("pdmp cells have unit weight");
    return build_pdmp(n, number(p["jump_rate"], "pdmp.jump_rate"), target);
  }

  Eigen::MatrixXd m = matrix_field(doc[expected], expected);
  const auto n = static_cast<std::size_t>(m.rows());
  if (weights && static_cast<std::size_t>(weights->size()) != n)
    throw ValidationError("weights and matrix sizes differ");
  const SpacePtr space = weights ? StateSpace::create(*weights) : StateSpace::uniform(n);
  if (kind == "ctmc") return build_ctmc(space, std::move(m));
  return build_dtmc(space, std::move(m));
}

Model parse_model_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
  return parse_model(doc);
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read model file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model_text(buf.str());
}

json model_to_json(const Model& model) {
  json out;
  out["kind"] = std::string(kind_name(model));
  std::visit(
      [&out](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, CtmcModel>) {
          out["weights"] = vector_json(m.space->weights());
          out["rates"] = matrix_json(m.rates);
        } else if constexpr (std::is_same_v<M, DtmcModel>) {
          out["weights"] = vector_json(m.space->weights());
          out["step"] = matrix_json(m.step.entries());
        } else {
          out["pdmp"] = {{"n", m.cells()},
                         {"jump_rate", m.jump_rate},
                         {"jump_target", vector_json(m.jump_target.values())}};
        }
      },
      model);
  return out;
}

std::string canonical_model(const Model& model) { return model_to_json(model).dump(2) + "\n"; }

json to_json(const Density& d) { return vector_json(d.values()); }

json to_json(const KernelOperator& k) { return matrix_json(k.entries()); }

json to_json(const StructuredOperator& t) {
  json out;
  if (t.singular()) {
    out["singular"] = {{"weight", t.singular()->weight}, {"map", t.singular()->map}};
  } else {
    out["singular"] = nullptr;
  }
  out["kernel"] = to_json(t.kernel());
  return out;
}

json to_json(const ConvergenceCertificate& c) {
  json audit = json::array();
  for (const auto& a : c.audit) {
    audit.push_back({{"t", a.time},
                     {"deficiency", a.deficiency},
                     {"distance", a.distance},
                     {"bound", a.bound},
                     {"margin", a.margin}});
  }
  return {{"certified", true},
          {"t0", c.t0},
          {"eta", c.eta},
          {"lower_bound", to_json(c.lower_bound)},
          {"rate", {{"c", c.rate.c}, {"rho", c.rate.rho}, {"t0", c.rate.t0}}},
          {"stationary", to_json(c.stationary)},
          {"audit", std::move(audit)}};
}

json to_json(const NoCertificate& c) {
  return {{"certified", false}, {"t0", c.t0}, {"eta", c.eta}, {"reason", c.reason}};
}

json to_json(const CertificationResult& r) {
  return std::visit([](const auto& c) { return to_json(c); }, r);
}

json to_json(const SpectralReport& r) {
  return {{"eigenvalues", complex_json(r.eigenvalues)},
          {"spectral_gap", r.spectral_gap},
          {"algebraic_multiplicity", r.algebraic_multiplicity},
          {"geometric_multiplicity", r.geometric_multiplicity},
          {"peripheral", complex_json(r.peripheral)},
          {"generator_applicable", r.generator_applicable}};
}

json to_json(const MeanErgodicReport& r) {
  return {{"times", r.times},
          {"distances", r.distances},
          {"decay_constant", r.decay_constant},
          {"monotone", r.monotone},
          {"passed", r.passed}};
}

json to_json(const CorollarySuite& s) {
  static constexpr const char* names[] = {"i", "ii", "iii", "iv", "v", "vi"};
  json conditions = json::array();
  for (std::size_t k = 0; k < s.conditions.size(); ++k) {
    const auto& c = s.conditions[k];
    conditions.push_back({{"condition", names[k]},
                          {"holds", c.holds ? json(*c.holds) : json(nullptr)},
                          {"evidence", c.evidence}});
  }
  return {{"irreducible", s.irreducible},
          {"kernel_part_nonzero", s.kernel_part_nonzero},
          {"continuous_time", s.continuous_time},
          {"hypothesis_met", s.hypothesis_met},
          {"hypothesis_note", s.hypothesis_note},
          {"conditions", std::move(conditions)},
          {"agree", s.agree}};
}

json to_json(const ProofChainReport& r) {
  json witnesses = json::array();
  for (const auto& w : r.witnesses) {
    witnesses.push_back({{"column", w.column},
                         {"s", w.s},
                         {"remainder_mass", w.remainder_mass},
                         {"kernel_mass", w.kernel_mass}});
  }
  json audit = json::array();
  for (const auto& [t, d] : r.audit) audit.push_back({{"t", t}, {"deficiency", d}});
  json construction = nullptr;
  if (r.construction) {
    construction = {{"s", r.construction->s},
                    {"witness_column", r.construction->witness_column},
                    {"domination_time", r.construction->domination_time},
                    {"square", to_json(r.construction->square)}};
  }
  return {{"t0", r.t0},
          {"stationary", to_json(r.stationary)},
          {"kernel", to_json(r.kernel)},
          {"remainder", to_json(r.remainder)},
          {"delta", r.delta},
          {"t1", optional_json(r.t1)},
          {"cesaro_distance", r.cesaro_distance},
          {"remainder_projection_norm", r.remainder_projection_norm},
          {"remainder_cesaro_norm", r.remainder_cesaro_norm},
          {"witnesses", std::move(witnesses)},
          {"t2", optional_json(r.t2)},
          {"audit_start", r.audit_start},
          {"max_audit_deficiency", r.max_audit_deficiency},
          {"audit", std::move(audit)},
          {"lower_bound", to_json(r.lower_bound)},
          {"meet", r.meet ? to_json(*r.meet) : json(nullptr)},
          {"construction", std::move(construction)},
          {"passed", r.passed},
          {"failing_step", r.failing_step.empty() ? json(nullptr) : json(r.failing_step)},
          {"failing_margin", r.failing_margin}};
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_series_csv(std::ostream& os, std::vector<SeriesRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const SeriesRow& a, const SeriesRow& b) { return a.t < b.t; });
  os << "t,op_distance_to_P,cesaro_distance,doeblin_mass\n";
  for (const auto& r : rows) {
    os << format_double(r.t) << ',' << format_double(r.op_distance_to_p) << ','
       << format_double(r.cesaro_distance) << ',' << format_double(r.doeblin_mass) << '\n';
  }
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

}  // namespace ergocert::io
