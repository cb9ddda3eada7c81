#include "datapolicy/dataset_io.hpp"

#include <fstream>
#include <optional>
#include <sstream>

namespace datapolicy {

using nlohmann::json;

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r).transpose()));
  return out;
}

namespace {

json vectors_to_json(const std::vector<Vector>& vs) {
  json out = json::array();
  for (const auto& v : vs) out.push_back(vector_to_json(v));
  return out;
}

json set_to_json(const TerminalSet& set) { return vectors_to_json(set.vertices); }

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw ParseError(source_ + ": " + path + ": " + what);
  }

  const json& field(const json& obj, const std::string& path, const char* key) const {
    if (!obj.is_object()) fail(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path, std::string("missing field \"") + key + "\"");
    return *it;
  }

  std::string string(const json& j, const std::string& path) const {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
  }

  bool boolean(const json& j, const std::string& path) const {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
  }

  double number(const json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
  }

  Vector vector(const json& j, const std::string& path, Index expected = -1) const {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    if (expected >= 0 && static_cast<Index>(j.size()) != expected) {
      fail(path, "expected " + std::to_string(expected) + " entries, got " + std::to_string(j.size()));
    }
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = number(j[i], path + "[" + std::to_string(i) + "]");
    return v;
  }

  Matrix matrix(const json& j, const std::string& path, Index rows = -1, Index cols = -1) const {
    if (!j.is_array()) fail(path, "expected an array of rows");
    if (rows >= 0 && static_cast<Index>(j.size()) != rows) {
      fail(path, "expected " + std::to_string(rows) + " rows, got " + std::to_string(j.size()));
    }
    if (j.empty()) fail(path, "matrix has no rows");
    const Index c = cols >= 0 ? cols : static_cast<Index>(j[0].is_array() ? j[0].size() : 0);
    Matrix m(static_cast<Index>(j.size()), c);
    for (std::size_t r = 0; r < j.size(); ++r) {
      m.row(static_cast<Index>(r)) = vector(j[r], path + "[" + std::to_string(r) + "]", c).transpose();
    }
    return m;
  }

  std::vector<Vector> vectors(const json& j, const std::string& path, Index dim) const {
    if (!j.is_array()) fail(path, "expected an array");
    std::vector<Vector> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(vector(j[i], path + "[" + std::to_string(i) + "]", dim));
    return out;
  }

  TerminalSet set(const json& j, const std::string& path, Index dim) const {
    TerminalSet s{vectors(j, path, dim)};
    if (s.vertices.empty()) fail(path, "terminal set needs at least one vertex");
    return s;
  }

 private:
  std::string source_;
};

}  // namespace

json dataset_to_json(const SafeSetStore& store) {
  const LtiSystem& sys = store.system();
  json doc;
  doc["format"] = kDatasetFormat;
  doc["system"] = {{"A", matrix_to_json(sys.a_matrix)},
                   {"B", matrix_to_json(sys.b_matrix)},
                   {"state_lower", vector_to_json(sys.state_lower)},
                   {"state_upper", vector_to_json(sys.state_upper)},
                   {"input_lower", vector_to_json(sys.input_lower)},
                   {"input_upper", vector_to_json(sys.input_upper)}};
  const StageCost& cost = store.stage_cost();
  json c = {{"kind", cost.name()}};
  if (const auto* q = cost.get_if<QuadStageCost>()) {
    c["state_weight"] = matrix_to_json(q->state_weight);
    c["input_weight"] = matrix_to_json(q->input_weight);
  } else if (const auto* ind = cost.get_if<TerminalSetIndicator>()) {
    c["vertices"] = set_to_json(ind->set);
  } else {
    c["vertices"] = set_to_json(cost.get_if<TerminalSetDistance>()->set);
  }
  doc["stage_cost"] = c;
  if (const TerminalSet* set = store.terminal_set()) {
    doc["mode"] = {{"kind", "terminal_set"}, {"vertices", set_to_json(*set)}};
  } else {
    doc["mode"] = {{"kind", "origin"}};
  }
  doc["validated"] = store.validated();
  doc["certified"] = store.certified();
  json trajs = json::array();
  for (const auto& t : store.trajectories()) {
    trajs.push_back({{"states", vectors_to_json(t.states)},
                     {"inputs", vectors_to_json(t.inputs)},
                     {"costs_to_go", t.costs_to_go}});
  }
  doc["trajectories"] = std::move(trajs);
  return doc;
}

SafeSetStore dataset_from_json(const json& doc, const std::string& source) {
  const Reader in(source);
  const std::string format = in.string(in.field(doc, "$", "format"), "format");
  if (format != kDatasetFormat) {
    throw VersionError(source + ": dataset format \"" + format + "\" is not supported (expected \"" +
                       kDatasetFormat + "\")");
  }

  const json& js = in.field(doc, "$", "system");
  LtiSystem sys;
  sys.a_matrix = in.matrix(in.field(js, "system", "A"), "system.A");
  const Index n = sys.a_matrix.rows();
  if (sys.a_matrix.cols() != n) in.fail("system.A", "must be square");
  sys.b_matrix = in.matrix(in.field(js, "system", "B"), "system.B", n);
  const Index d = sys.b_matrix.cols();
  sys.state_lower = in.vector(in.field(js, "system", "state_lower"), "system.state_lower", n);
  sys.state_upper = in.vector(in.field(js, "system", "state_upper"), "system.state_upper", n);
  sys.input_lower = in.vector(in.field(js, "system", "input_lower"), "system.input_lower", d);
  sys.input_upper = in.vector(in.field(js, "system", "input_upper"), "system.input_upper", d);

  const json& jc = in.field(doc, "$", "stage_cost");
  const std::string kind = in.string(in.field(jc, "stage_cost", "kind"), "stage_cost.kind");
  std::optional<StageCost> cost;
  if (kind == "quadratic") {
    QuadStageCost q;
    q.state_weight = in.matrix(in.field(jc, "stage_cost", "state_weight"), "stage_cost.state_weight", n, n);
    q.input_weight = in.matrix(in.field(jc, "stage_cost", "input_weight"), "stage_cost.input_weight", d, d);
    cost.emplace(std::move(q));
  } else if (kind == "terminal_set_indicator") {
    cost.emplace(TerminalSetIndicator{in.set(in.field(jc, "stage_cost", "vertices"), "stage_cost.vertices", n)});
  } else if (kind == "terminal_set_distance") {
    cost.emplace(TerminalSetDistance{in.set(in.field(jc, "stage_cost", "vertices"), "stage_cost.vertices", n)});
  } else {
    in.fail("stage_cost.kind", "unknown stage cost \"" + kind + "\"");
  }

  const json& jm = in.field(doc, "$", "mode");
  const std::string mode_kind = in.string(in.field(jm, "mode", "kind"), "mode.kind");
  SafeSetMode mode;
  if (mode_kind == "origin") {
    mode = OriginMode{};
  } else if (mode_kind == "terminal_set") {
    mode = TerminalSetMode{in.set(in.field(jm, "mode", "vertices"), "mode.vertices", n)};
  } else {
    in.fail("mode.kind", "unknown mode \"" + mode_kind + "\"");
  }

  const bool validated = in.boolean(in.field(doc, "$", "validated"), "validated");

  const json& jt = in.field(doc, "$", "trajectories");
  if (!jt.is_array()) in.fail("trajectories", "expected an array");
  std::vector<Trajectory> trajs;
  for (std::size_t j = 0; j < jt.size(); ++j) {
    const std::string p = "trajectories[" + std::to_string(j) + "]";
    Trajectory t;
    t.states = in.vectors(in.field(jt[j], p, "states"), p + ".states", n);
    t.inputs = in.vectors(in.field(jt[j], p, "inputs"), p + ".inputs", d);
    const json& jctg = in.field(jt[j], p, "costs_to_go");
    const Vector ctg = in.vector(jctg, p + ".costs_to_go", static_cast<Index>(t.states.size()));
    if (t.inputs.size() != t.states.size()) {
      in.fail(p, std::to_string(t.states.size()) + " states but " + std::to_string(t.inputs.size()) + " inputs");
    }
    t.costs_to_go.assign(ctg.data(), ctg.data() + ctg.size());
    trajs.push_back(std::move(t));
  }
  if (trajs.empty()) in.fail("trajectories", "at least one trajectory is required");

  try {
    if (validated) return build_safe_set(std::move(trajs), sys, *cost, std::move(mode));
    return build_safe_set_unvalidated(std::move(trajs), sys, *cost, std::move(mode));
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  } catch (const Error& e) {
    throw ParseError(source + ": " + e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string() + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(column) +
                     ": " + e.what());
  }
}

void write_json_file(const json& doc, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << doc.dump(1) << '\n';
  if (!out) throw Error("write to " + path.string() + " failed");
}

void save_dataset(const SafeSetStore& store, const std::filesystem::path& path) {
  write_json_file(dataset_to_json(store), path);
}

SafeSetStore load_dataset(const std::filesystem::path& path) {
  return dataset_from_json(read_json_file(path), path.string());
}

}  // namespace datapolicy
