#include "pathvar/net_json.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace pathvar {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::set<std::string>& allowed,
                  const std::set<std::string>& required, const std::string& where) {
  if (!j.is_object()) throw PreconditionError(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw PreconditionError("unknown key \"" + it.key() + "\" in " + where);
  }
  for (const auto& k : required) {
    if (!j.contains(k)) throw PreconditionError("missing key \"" + k + "\" in " + where);
  }
}

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw PreconditionError(where + " must be a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw PreconditionError(where + " must be an integer");
  return j.get<int>();
}

Matrix matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw PreconditionError(where + " must be a nonempty array");
  std::vector<std::vector<double>> rows;
  rows.reserve(j.size());
  for (const auto& r : j) {
    if (!r.is_array()) throw PreconditionError(where + " rows must be arrays");
    std::vector<double> row;
    row.reserve(r.size());
    for (const auto& v : r) row.push_back(as_number(v, where));
    rows.push_back(std::move(row));
  }
  return Matrix::from_rows(rows);
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (double v : m.row(i)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

OutputSpec output_from_json(const json& j) {
  require_keys(j, {"kind", "B"}, {"kind"}, "output");
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear") {
    if (j.contains("B")) throw PreconditionError("linear output takes no B");
    return OutputSpec::linear();
  }
  if (kind == "clip") {
    if (!j.contains("B")) throw PreconditionError("clip output requires B");
    return OutputSpec::clip(as_number(j.at("B"), "output.B"));
  }
  throw PreconditionError("output.kind must be \"linear\" or \"clip\"");
}

json output_to_json(const OutputSpec& o) {
  json j;
  j["kind"] = o.kind == OutputSpec::Kind::linear ? "linear" : "clip";
  if (o.kind == OutputSpec::Kind::clip) j["B"] = o.clip_bound;
  return j;
}

void check_orientation(const json& j) {
  if (j.at("orientation").get<std::string>() != "inner_first")
    throw PreconditionError("orientation must be \"inner_first\"");
}

InputEncoding encoding_from_string(const std::string& s) {
  if (s == "raw") return InputEncoding::raw;
  if (s == "signed") return InputEncoding::signed_pairs;
  if (s == "signed_locked") return InputEncoding::signed_locked;
  throw PreconditionError("input_encoding must be raw, signed or signed_locked");
}

std::string encoding_to_string(InputEncoding e) {
  switch (e) {
    case InputEncoding::raw: return "raw";
    case InputEncoding::signed_pairs: return "signed";
    case InputEncoding::signed_locked: return "signed_locked";
  }
  return "raw";
}

std::vector<CanonicalStage> canonical_stages_from_json(const json& j) {
  const auto& layers = j.at("layers");
  if (!layers.is_array() || layers.empty())
    throw PreconditionError("layers must be a nonempty array");
  std::vector<CanonicalStage> stages;
  stages.reserve(layers.size());
  for (const auto& layer : layers) {
    require_keys(layer, {"weights"}, {"weights"}, "canonical layer");
    CanonicalStage st;
    st.weights = matrix_from_json(layer.at("weights"), "weights");
    stages.push_back(std::move(st));
  }
  if (j.contains("signs")) {
    const auto& signs = j.at("signs");
    if (!signs.is_array() || signs.size() != stages.size() - 1)
      throw PreconditionError("signs must list one array per hidden layer");
    for (std::size_t s = 0; s < signs.size(); ++s) {
      const auto& row = signs[s];
      stages[s].signs.clear();
      for (const auto& v : row)
        stages[s].signs.push_back(static_cast<std::int8_t>(as_int(v, "signs")));
    }
  }
  if (static_cast<std::size_t>(as_int(j.at("L"), "L")) != stages.size())
    throw PreconditionError("L does not match the number of layers");
  return stages;
}

json canonical_body_to_json(const CanonicalNet& net) {
  json j;
  j["orientation"] = "inner_first";
  j["d"] = net.input_dim();
  j["L"] = static_cast<int>(net.depth());
  j["input_encoding"] = encoding_to_string(net.encoding());
  json layers = json::array();
  for (const auto& st : net.stages()) {
    json layer;
    layer["weights"] = matrix_to_json(st.weights);
    layers.push_back(std::move(layer));
  }
  j["layers"] = std::move(layers);
  json signs = json::array();
  for (std::size_t s = 0; s + 1 < net.depth(); ++s) {
    json row = json::array();
    for (auto sg : net.stages()[s].signs) row.push_back(static_cast<int>(sg));
    signs.push_back(std::move(row));
  }
  j["signs"] = std::move(signs);
  j["output"] = output_to_json(net.output());
  return j;
}

const std::set<std::string> kGeneralKeys = {"orientation", "d", "L", "layers", "output"};
const std::set<std::string> kCanonicalKeys = {"orientation", "d",      "L",     "layers",
                                              "output",      "canonical", "signs",
                                              "input_encoding"};
const std::set<std::string> kNormalizedKeys = {"orientation", "d",          "L",
                                               "layers",      "output",     "normalized",
                                               "signs",       "input_encoding", "V",
                                               "dead_units"};

}  // namespace

json to_json(const GeneralReLUNet& net) {
  json j;
  j["orientation"] = "inner_first";
  j["d"] = net.input_dim();
  j["L"] = static_cast<int>(net.depth());
  json layers = json::array();
  for (const auto& st : net.stages()) {
    json layer;
    layer["weights"] = matrix_to_json(st.weights);
    json offs = json::array();
    for (double b : st.offsets) offs.push_back(b);
    layer["offsets"] = std::move(offs);
    layers.push_back(std::move(layer));
  }
  j["layers"] = std::move(layers);
  j["output"] = output_to_json(net.output());
  return j;
}

json to_json(const CanonicalNet& net) {
  json j = canonical_body_to_json(net);
  j["canonical"] = true;
  return j;
}

json to_json(const NormalizedNet& net) {
  json j = canonical_body_to_json(net.tables());
  j["normalized"] = true;
  j["V"] = net.scale();
  json dead = json::array();
  for (const auto& layer : net.dead_units()) {
    json row = json::array();
    for (auto u : layer) row.push_back(u);
    dead.push_back(std::move(row));
  }
  j["dead_units"] = std::move(dead);
  return j;
}

GeneralReLUNet general_net_from_json(const json& j) {
  require_keys(j, kGeneralKeys, {"orientation", "d", "L", "layers", "output"}, "net");
  check_orientation(j);
  int d = as_int(j.at("d"), "d");
  const auto& layers = j.at("layers");
  if (!layers.is_array() || layers.empty())
    throw PreconditionError("layers must be a nonempty array");
  std::vector<DenseStage> stages;
  stages.reserve(layers.size());
  for (const auto& layer : layers) {
    require_keys(layer, {"weights", "offsets"}, {"weights"}, "layer");
    DenseStage st;
    st.weights = matrix_from_json(layer.at("weights"), "weights");
    if (layer.contains("offsets")) {
      for (const auto& v : layer.at("offsets")) st.offsets.push_back(as_number(v, "offsets"));
    }
    stages.push_back(std::move(st));
  }
  if (static_cast<std::size_t>(as_int(j.at("L"), "L")) != stages.size())
    throw PreconditionError("L does not match the number of layers");
  return GeneralReLUNet(d, std::move(stages), output_from_json(j.at("output")));
}

CanonicalNet canonical_net_from_json(const json& j) {
  require_keys(j, kCanonicalKeys, {"orientation", "d", "L", "layers", "output", "canonical"},
               "canonical net");
  check_orientation(j);
  if (!j.at("canonical").is_boolean() || !j.at("canonical").get<bool>())
    throw PreconditionError("canonical flag must be true");
  InputEncoding enc = j.contains("input_encoding")
                          ? encoding_from_string(j.at("input_encoding").get<std::string>())
                          : InputEncoding::raw;
  return CanonicalNet(as_int(j.at("d"), "d"), enc, canonical_stages_from_json(j),
                      output_from_json(j.at("output")));
}

NormalizedNet normalized_net_from_json(const json& j) {
  require_keys(j, kNormalizedKeys, {"orientation", "d", "L", "layers", "output", "normalized", "V"},
               "normalized net");
  check_orientation(j);
  if (!j.at("normalized").is_boolean() || !j.at("normalized").get<bool>())
    throw PreconditionError("normalized flag must be true");
  InputEncoding enc = j.contains("input_encoding")
                          ? encoding_from_string(j.at("input_encoding").get<std::string>())
                          : InputEncoding::raw;
  CanonicalNet tables(as_int(j.at("d"), "d"), enc, canonical_stages_from_json(j),
                      output_from_json(j.at("output")));
  std::vector<std::vector<std::uint32_t>> dead(tables.hidden_layers());
  if (j.contains("dead_units")) {
    const auto& du = j.at("dead_units");
    if (!du.is_array() || du.size() != tables.hidden_layers())
      throw PreconditionError("dead_units must list one array per hidden layer");
    for (std::size_t s = 0; s < du.size(); ++s)
      for (const auto& v : du[s]) dead[s].push_back(static_cast<std::uint32_t>(as_int(v, "dead_units")));
  }
  NormalizedNet net(std::move(tables), as_number(j.at("V"), "V"), std::move(dead));
  net.validate();
  return net;
}

NetVariant net_from_json(const json& j) {
  if (!j.is_object()) throw PreconditionError("net must be a JSON object");
  if (j.contains("normalized")) return normalized_net_from_json(j);
  if (j.contains("canonical")) return canonical_net_from_json(j);
  return general_net_from_json(j);
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + path);
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw PreconditionError("invalid JSON in " + path + ": " + e.what());
  }
}

NetVariant load_net(const std::string& path) { return net_from_json(load_json_file(path)); }

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << contents;
  if (!out) throw IoError("error while writing " + path);
}

}  // namespace pathvar
