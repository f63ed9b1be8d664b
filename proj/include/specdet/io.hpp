#pragma once

#include <string>
#include <vector>

#include "specdet/bfk.hpp"
#include "specdet/eigensolver.hpp"
#include "specdet/zeta.hpp"

namespace specdet {

// Shortest decimal that round-trips to the same double (CSV convention).
std::string format_shortest(double v);
// Fixed 17 significant digits (JSON convention).
std::string format_17(double v);

std::string to_string(EigenvalueClass cls);
EigenvalueClass eigenvalue_class_from_string(const std::string& s);

// Minimal streaming JSON writer with caller-fixed key order; numbers are
// pre-formatted so outputs are byte-deterministic.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(const std::string& k);
  JsonWriter& number(double v);
  JsonWriter& integer(long long v);
  JsonWriter& string(const std::string& s);
  JsonWriter& boolean(bool b);
  std::string str() const { return out_; }

 private:
  void separate();
  std::string out_;
  std::vector<bool> has_item_;
};

// Spectrum files: CSV columns j, re, im, class, multiplicity, residual and
// a JSON mirror carrying the same fields plus the strip summary.
std::string spectrum_to_csv(const Spectrum& spectrum);
Spectrum spectrum_from_csv(const std::string& text, double strip_height);
std::string spectrum_to_json(const Spectrum& spectrum);

std::string residuals_to_csv(const std::vector<AsymptoticResidualRow>& rows);

// {value_re, value_im, method, cut, epsilon, diagnostics{...}}
std::string determinant_result_to_json(const DeterminantResult& result);
// Same fields written as one object into an ongoing document.
void write_determinant_result(JsonWriter& w, const DeterminantResult& result);

// {K_theta, trace_factor, det_BYC, determinant, theta, profile_hash}
std::string bfk_report_to_json(const BFKRunReport& report);

// Canonical tagged-object form of a profile; stable across runs, used both
// for hashing and for config echo.
std::string profile_canonical_json(const CoefficientProfile& profile);
std::string fnv1a_hex(const std::string& data);
std::string profile_hash(const CoefficientProfile& profile);

}  // namespace specdet
