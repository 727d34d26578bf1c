#pragma once

#include <string>
#include <vector>

namespace ward::cli {

std::string sha256_file(const std::string& path);

// Every artifact a run writes is registered here; the manifest itself is
// written last and names each file with its size and SHA-256.
class Manifest {
 public:
  explicit Manifest(std::string dir) : dir_(std::move(dir)) {}
  std::string path(const std::string& name) const { return dir_ + "/" + name; }
  // Write text to dir/name and register it.
  void text(const std::string& name, const std::string& body);
  void add(const std::string& name);
  void write(const std::string& command, const std::string& config_json, int exit_code) const;

 private:
  std::string dir_;
  std::vector<std::string> files_;
};

}  // namespace ward::cli
