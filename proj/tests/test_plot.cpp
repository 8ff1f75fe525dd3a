#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "edgerec/plot.hpp"

using namespace edgerec;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
  return (fs::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  os << content;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t count = 0, pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace

TEST_SUITE("plot") {

TEST_CASE("an aggregate without data rows is rejected and no file appears") {
  const std::string csv = temp_path("edgerec_plot_empty.csv");
  const std::string svg = temp_path("edgerec_plot_empty.svg");
  std::remove(svg.c_str());
  write_file(csv, "level,episode,mean_smoothed,std_smoothed\n");
  CHECK_THROWS_AS(emit_plot(csv, svg), std::runtime_error);
  CHECK_FALSE(fs::exists(svg));
  std::remove(csv.c_str());
}

TEST_CASE("schema mismatches are rejected") {
  const std::string csv = temp_path("edgerec_plot_schema.csv");
  const std::string svg = temp_path("edgerec_plot_schema.svg");
  write_file(csv, "level,episode,return\n0,0,1\n");
  CHECK_THROWS_AS(emit_plot(csv, svg), std::runtime_error);
  write_file(csv, "level,episode,mean_smoothed,std_smoothed\n0,0,1\n");
  CHECK_THROWS_AS(emit_plot(csv, svg), std::runtime_error);
  write_file(csv, "level,episode,mean_smoothed,std_smoothed\n0,0,x,1\n");
  CHECK_THROWS_AS(emit_plot(csv, svg), std::runtime_error);
  CHECK_FALSE(fs::exists(svg));
  std::remove(csv.c_str());
}

TEST_CASE("a single constant curve renders with a zero-width band") {
  const std::string csv = temp_path("edgerec_plot_const.csv");
  const std::string svg = temp_path("edgerec_plot_const.svg");
  std::string content = "level,episode,mean_smoothed,std_smoothed\n";
  for (int ep = 0; ep < 50; ++ep)
    content += "0.5," + std::to_string(ep) + ",2,0\n";
  write_file(csv, content);

  emit_plot(csv, svg);
  const std::string out = slurp(svg);
  CHECK(count_occurrences(out, "<polyline") == 1);
  CHECK(count_occurrences(out, "<polygon") == 1);
  CHECK(out.find("p = 0.5") != std::string::npos);
  CHECK(out.find("episode") != std::string::npos);
  CHECK(out.find("return") != std::string::npos);

  std::remove(csv.c_str());
  std::remove(svg.c_str());
}

TEST_CASE("two levels render as two labeled curves") {
  const std::string csv = temp_path("edgerec_plot_two.csv");
  const std::string svg = temp_path("edgerec_plot_two.svg");
  std::string content = "level,episode,mean_smoothed,std_smoothed\n";
  for (int ep = 0; ep < 30; ++ep)
    content += "0," + std::to_string(ep) + "," + std::to_string(1.0 + 0.01 * ep) + ",0.1\n";
  for (int ep = 0; ep < 30; ++ep)
    content += "0.25," + std::to_string(ep) + "," + std::to_string(0.5 + 0.01 * ep) + ",0.1\n";
  write_file(csv, content);

  emit_plot(csv, svg);
  const std::string out = slurp(svg);
  CHECK(count_occurrences(out, "<polyline") == 2);
  CHECK(count_occurrences(out, "<polygon") == 2);
  CHECK(out.find("p = 0") != std::string::npos);
  CHECK(out.find("p = 0.25") != std::string::npos);

  std::remove(csv.c_str());
  std::remove(svg.c_str());
}

}  // TEST_SUITE
