#include "phasecrb/output.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <random>
#include <system_error>

namespace phasecrb {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string to_csv(const std::vector<BoundSeries>& series) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const auto& jd = s.jd_used[i];
      out += format_double(s.x[i]);
      out += ',';
      out += format_double(s.y[i]);
      out += ',';
      out += s.label;
      out += ',';
      out += format_double(jd.jd);
      out += ',';
      out += format_double(jd.std_error);
      out += ',';
      if (jd.scenario == Scenario::nda) out += std::to_string(jd.seed);
      out += '\n';
    }
  }
  return out;
}

nlohmann::json to_json(const std::vector<BoundSeries>& series) {
  auto arr = nlohmann::json::array();
  for (const auto& s : series) {
    std::vector<double> jd, se;
    for (const auto& e : s.jd_used) {
      jd.push_back(e.jd);
      se.push_back(e.std_error);
    }
    arr.push_back({{"label", s.label}, {"x", s.x}, {"y", s.y}, {"jd", jd}, {"jd_stderr", se}});
  }
  return arr;
}

void write_atomically(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::random_device rd;
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::system_error(errno, std::generic_category(), "cannot open " + tmp.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw std::system_error(errno, std::generic_category(), "cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw std::system_error(ec, "cannot rename onto " + path.string());
  }
}

}  // namespace phasecrb
