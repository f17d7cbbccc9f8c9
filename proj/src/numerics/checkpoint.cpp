#include "ember/numerics/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ember/error.hpp"

namespace ember::num {

namespace {

constexpr const char* kMagic = "# ember-checkpoint v1";

void append_hex(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  out.append(buf, res.ptr);
}

double parse_hex(std::string_view tok, std::size_t line) {
  double v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v,
                             std::chars_format::hex);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw FormatError("checkpoint line " + std::to_string(line) +
                      ": bad value '" + std::string(tok) + "'");
  return v;
}

std::vector<std::size_t> parse_shape(const std::string& s, std::size_t line) {
  std::vector<std::size_t> shape;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    std::size_t v = 0;
    auto res = std::from_chars(part.data(), part.data() + part.size(), v);
    if (res.ec != std::errc() || part.empty())
      throw FormatError("checkpoint line " + std::to_string(line) + ": bad shape " + s);
    shape.push_back(v);
  }
  return shape;
}

}  // namespace

std::string serialize_checkpoint(const nlohmann::json& header, const ParamStore& params) {
  std::string out = kMagic;
  out += '\n';
  out += header.dump();
  out += '\n';
  for (const auto& info : params.infos()) {
    out += "param ";
    out += info.path;
    out += ' ';
    for (std::size_t i = 0; i < info.shape.size(); ++i) {
      if (i) out += 'x';
      out += std::to_string(info.shape[i]);
    }
    for (double v : params.value(params.id(info.path))) {
      out += ' ';
      append_hex(out, v);
    }
    out += '\n';
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& header,
                     const ParamStore& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path.string(), "cannot write checkpoint");
  os << serialize_checkpoint(header, params);
  if (!os) throw IoError(path.string(), "failed writing checkpoint");
}

Checkpoint parse_checkpoint(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kMagic)
    throw FormatError("checkpoint line 1: missing magic header");
  Checkpoint ck;
  if (!std::getline(is, line)) throw FormatError("checkpoint line 2: missing header");
  try {
    ck.header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint line 2: ") + e.what());
  }
  std::size_t lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag, path, shape_s;
    ls >> tag >> path >> shape_s;
    if (tag != "param" || path.empty() || shape_s.empty())
      throw FormatError("checkpoint line " + std::to_string(lineno) + ": expected 'param'");
    auto shape = parse_shape(shape_s, lineno);
    std::vector<double> data;
    std::string tok;
    while (ls >> tok) data.push_back(parse_hex(tok, lineno));
    if (data.size() != shape_product(shape))
      throw FormatError("checkpoint line " + std::to_string(lineno) + ": " + path +
                        " has " + std::to_string(data.size()) + " values for shape " +
                        shape_s);
    ck.params.declare(path, shape);
    ck.params.set(path, Tensor(shape, std::move(data)));
  }
  return ck;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path.string(), "cannot open checkpoint");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_checkpoint(ss.str());
}

void assign_params(ParamStore& target, const ParamStore& source) {
  for (const auto& info : target.infos()) {
    if (!source.contains(info.path))
      throw FormatError("checkpoint lacks parameter " + info.path);
    target.set(info.path, source.tensor(source.id(info.path)));
  }
}

}  // namespace ember::num
