#include "gbst/file_util.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gbst/error.h"

namespace gbst {

namespace fs = std::filesystem;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw DataError("error while reading " + path);
  return ss.str();
}

void WriteFileAtomic(const std::string& path, const std::string& content) {
  WriteFilesAtomic({{path, content}});
}

void WriteFilesAtomic(const std::vector<std::pair<std::string, std::string>>& files) {
  std::vector<std::string> temps;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& t : temps) fs::remove(t, ec);
  };
  for (const auto& [path, content] : files) {
    fs::path target(path);
    if (target.has_parent_path()) {
      std::error_code ec;
      fs::create_directories(target.parent_path(), ec);
    }
    if (fs::is_directory(target)) {
      cleanup();
      throw DataError("cannot write " + path + ": it is a directory");
    }
    std::string temp = path + ".tmp";
    temps.push_back(temp);
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) {
      cleanup();
      throw DataError("cannot write " + path);
    }
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::error_code ec;
    fs::rename(temps[i], files[i].first, ec);
    if (ec) {
      cleanup();
      throw DataError("cannot move " + temps[i] + " to " + files[i].first + ": " + ec.message());
    }
  }
}

}  // namespace gbst
