// Reporting: fixed-format numbers, CSV tables, git-style content hash and
// the JSON run summary.
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "json.hpp"
#include "semidirac/cli.hpp"
#include "semidirac/errors.hpp"

namespace semidirac::cli {

using nlohmann::json;

std::string version() { return SEMIDIRAC_VERSION; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string git_blob_sha1(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw Error("SHA-1 digest failed");
  std::string hex;
  char b[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(b, sizeof b, "%02x", md[i]);
    hex += b;
  }
  return hex;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add(std::vector<std::string> cells) {
  if (cells.size() != header_.size())
    throw DimensionError("csv row has " + std::to_string(cells.size()) + " cells, header has " +
                         std::to_string(header_.size()));
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

bool ResultBundle::check(const std::string& name) const {
  for (const auto& [k, v] : checks)
    if (k == name) return v;
  throw InputError("no check named '" + name + "'");
}

std::string summary_json(const ResultBundle& bundle, const std::string& timestamp) {
  json j;
  j["command"] = to_string(bundle.command);
  j["config"] = json::parse(bundle.config_echo);
  json checks = json::object();
  for (const auto& [k, v] : bundle.checks) checks[k] = v;
  j["checks"] = checks;
  j["all_checks_pass"] = std::all_of(bundle.checks.begin(), bundle.checks.end(),
                                     [](const auto& c) { return c.second; });
  json metrics = json::object();
  for (const auto& [k, v] : bundle.metrics) {
    if (std::isfinite(v))
      metrics[k] = v;
    else
      metrics[k] = format_double(v);
  }
  j["metrics"] = metrics;
  j["files"] = bundle.files;
  j["provenance"] = {{"version", version()},
                     {"timestamp", timestamp},
                     {"config_hash", git_blob_sha1(bundle.config_echo)}};
  return j.dump(2) + "\n";
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InputError*>(&e) ||
      dynamic_cast<const DimensionError*>(&e) || dynamic_cast<const UnsupportedError*>(&e))
    return 2;
  if (dynamic_cast<const ConvergenceError*>(&e)) return 3;
  return 1;
}

}  // namespace semidirac::cli
