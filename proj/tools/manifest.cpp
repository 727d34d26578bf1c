#include "manifest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include <json.hpp>
#include <openssl/evp.h>

#include "ward/io.hpp"

namespace ward::cli {

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WardError(ErrorKind::Io, "cannot read " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, size_t(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  char h[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(h, sizeof h, "%02x", md[i]);
    hex += h;
  }
  return hex;
}

void Manifest::text(const std::string& name, const std::string& body) {
  write_text(path(name), body);
  add(name);
}

void Manifest::add(const std::string& name) { files_.push_back(name); }

void Manifest::write(const std::string& command, const std::string& config_json, int exit_code) const {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : files_)
    files.push_back({{"path", f},
                     {"bytes", std::filesystem::file_size(path(f))},
                     {"sha256", sha256_file(path(f))}});
  nlohmann::json m = {{"schema_version", kSchemaVersion},
                      {"command", command},
                      {"exit_code", exit_code},
                      {"config", nlohmann::json::parse(config_json)},
                      {"files", files}};
  write_text(path("manifest.json"), m.dump(2));
}

}  // namespace ward::cli
