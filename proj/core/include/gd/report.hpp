#pragma once

#include <string>
#include <vector>

#include "gd/search.hpp"

namespace gd {

// Walks the genotype and substitutes chosen op expressions and output
// weights into one equation per dependent variable. Zero-op branches are
// dropped; coefficients are rounded for display (full precision lives in
// the JSON). Example: "P_detected = logistic(1.07 * I1 - 1.97 * I0)".
std::string render_equation(const Genotype& g, const std::vector<std::string>& iv_names,
                            const std::vector<std::string>& dv_names, int decimals);

// Graphviz export: inputs as boxes, intermediates as circles, outputs as
// double circles; edge labels are the rendered op terms.
std::string genotype_to_dot(const Genotype& g, const std::vector<std::string>& iv_names,
                            const std::vector<std::string>& dv_names, int decimals);

std::string search_config_to_json(const SearchConfig& c);
SearchConfig search_config_from_json(const std::string& text);

// Pretty-printed JSON with fixed key order; load(save(r)) == r.
std::string search_result_to_json(const SearchResult& r);
SearchResult search_result_from_json(const std::string& text);

// {case}_{method}_k{K}_g{gamma}_s{seed}.json
std::string run_file_name(const SearchConfig& c);
std::string format_gamma(double gamma);

// case,method,k,gamma,n,mean_test_mse,sem_test_mse,best_val_flag,excluded
std::string summary_to_csv(const Summary& summary);

std::string iso8601_utc_now();
std::string hostname_string();
std::string checksum_hex(std::uint64_t checksum);

}  // namespace gd
