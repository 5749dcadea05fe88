#pragma once

// JSON model files, JSON reports and the CSV time series.
//
// Model file schema (keys outside this list are rejected):
//   {"kind": "ctmc", "weights": [mu...], "rates": [[q_ij...]...]}
//   {"kind": "dtmc", "weights": [mu...], "step":  [[t_ij...]...]}
//   {"kind": "pdmp", "pdmp": {"n": int, "jump_rate": r, "jump_target": [...]}}
// Matrices are row-major in density coordinates, (T f)_i = sum_j t_ij f_j.
// "weights" defaults to all ones; a pdmp file may only give all ones.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ergocert/certify.hpp"
#include "ergocert/lower_bounds.hpp"
#include "ergocert/models.hpp"
#include "ergocert/spectral.hpp"

namespace ergocert::io {

using nlohmann::json;

/// Throws ValidationError on malformed JSON, schema violations and invalid
/// models.
Model parse_model(const json& doc);
Model parse_model_text(std::string_view text);
Model load_model(const std::filesystem::path& path);

json model_to_json(const Model& model);
/// Sorted keys, two-space indent, trailing newline. Fixed point of
/// parse_model_text followed by canonical_model.
std::string canonical_model(const Model& model);

json to_json(const Density& d);
json to_json(const KernelOperator& k);
json to_json(const StructuredOperator& t);
json to_json(const ConvergenceCertificate& c);
json to_json(const NoCertificate& c);
json to_json(const CertificationResult& r);
json to_json(const SpectralReport& r);
json to_json(const MeanErgodicReport& r);
json to_json(const CorollarySuite& s);
json to_json(const ProofChainReport& r);

struct SeriesRow {
  double t = 0.0;
  double op_distance_to_p = 0.0;  // NaN when P is unavailable
  double cesaro_distance = 0.0;
  double doeblin_mass = 0.0;
};

/// Header t,op_distance_to_P,cesaro_distance,doeblin_mass; rows sorted by t;
/// values printed with 17 significant digits.
void write_series_csv(std::ostream& os, std::vector<SeriesRow> rows);

/// %.17g, with "nan", "inf" and "-inf" for non-finite values.
std::string format_double(double x);

void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace ergocert::io
