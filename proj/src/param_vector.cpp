#include "fedsim/param_vector.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace fedsim {

ParamLayout::ParamLayout(std::vector<TensorSpec> specs) : specs_(std::move(specs)) {
  offsets_.reserve(specs_.size());
  for (const TensorSpec& s : specs_) {
    if (s.size() == 0) throw std::invalid_argument("ParamLayout: empty tensor " + s.name);
    offsets_.push_back(total_);
    total_ += s.size();
  }
}

std::size_t ParamLayout::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    if (specs_[i].name == name) return i;
  }
  throw std::invalid_argument("ParamLayout: no tensor named " + name);
}

ParamVector::ParamVector(ParamLayoutPtr layout)
    : layout_(std::move(layout)), values_(layout_ ? layout_->size() : 0, 0.0) {}

ParamVector::ParamVector(ParamLayoutPtr layout, Vector values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (!layout_ || layout_->size() != values_.size()) {
    throw std::invalid_argument("ParamVector: values do not match layout size");
  }
}

std::span<double> ParamVector::segment(std::size_t tensor_index) {
  return {values_.data() + layout_->offset(tensor_index), layout_->spec(tensor_index).size()};
}

std::span<const double> ParamVector::segment(std::size_t tensor_index) const {
  return {values_.data() + layout_->offset(tensor_index), layout_->spec(tensor_index).size()};
}

void ParamVector::require_same_layout(const ParamVector& other, const char* what) const {
  if (!layout_ || !other.layout_ || !(*layout_ == *other.layout_)) {
    throw std::invalid_argument(std::string(what) + ": parameter layouts differ");
  }
}

bool ParamVector::operator==(const ParamVector& other) const {
  if (!layout_ || !other.layout_) return values_ == other.values_ && !layout_ == !other.layout_;
  return *layout_ == *other.layout_ && values_ == other.values_;
}

namespace {

std::span<double> named_segment(ParamVector& params, const std::string& name, std::size_t rows,
                                std::size_t cols) {
  std::size_t index = params.layout()->index_of(name);
  const TensorSpec& spec = params.layout()->spec(index);
  if (spec.rows != rows || spec.cols != cols) {
    throw std::invalid_argument("tensor " + name + " is " + std::to_string(spec.rows) + "x" +
                                std::to_string(spec.cols) + " in the layout, got " +
                                std::to_string(rows) + "x" + std::to_string(cols));
  }
  return params.segment(index);
}

}  // namespace

void store_tensor(ParamVector& params, const std::string& name, const Matrix& m) {
  auto seg = named_segment(params, name, m.rows(), m.cols());
  std::copy(m.values().begin(), m.values().end(), seg.begin());
}

void store_tensor(ParamVector& params, const std::string& name, const Vector& v) {
  auto seg = named_segment(params, name, v.size(), 1);
  std::copy(v.begin(), v.end(), seg.begin());
}

void fetch_tensor(const ParamVector& params, const std::string& name, Matrix& m) {
  auto seg = named_segment(const_cast<ParamVector&>(params), name, m.rows(), m.cols());
  std::copy(seg.begin(), seg.end(), m.values().begin());
}

void fetch_tensor(const ParamVector& params, const std::string& name, Vector& v) {
  auto seg = named_segment(const_cast<ParamVector&>(params), name, v.size(), 1);
  std::copy(seg.begin(), seg.end(), v.begin());
}

ParamVector sgd_apply(const ParamVector& params, const ParamVector& grad, double eta) {
  params.require_same_layout(grad, "sgd_apply");
  ParamVector out = params;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = params[i] - eta * grad[i];
  return out;
}

void axpy_params(double alpha, const ParamVector& x, ParamVector& y) {
  y.require_same_layout(x, "axpy_params");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

void save_checkpoint(const ParamVector& params, const std::filesystem::path& file) {
  if (!params.layout()) throw std::invalid_argument("save_checkpoint: parameter vector has no layout");
  nlohmann::json doc;
  doc["format"] = "fedsim-checkpoint-v1";
  doc["tensors"] = nlohmann::json::array();
  for (const TensorSpec& s : params.layout()->specs()) {
    doc["tensors"].push_back({{"name", s.name}, {"rows", s.rows}, {"cols", s.cols}});
  }
  doc["values"] = params.values();
  std::ofstream out(file);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + file.string());
  out << doc.dump(2) << "\n";
}

ParamVector load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + file.string());
  nlohmann::json doc = nlohmann::json::parse(in);
  if (doc.value("format", "") != "fedsim-checkpoint-v1") {
    throw std::runtime_error("load_checkpoint: unrecognized checkpoint format in " + file.string());
  }
  std::vector<TensorSpec> specs;
  for (const auto& t : doc.at("tensors")) {
    specs.push_back({t.at("name").get<std::string>(), t.at("rows").get<std::size_t>(),
                     t.at("cols").get<std::size_t>()});
  }
  Vector values = doc.at("values").get<Vector>();
  auto layout = std::make_shared<const ParamLayout>(std::move(specs));
  if (!all_finite(values)) throw std::runtime_error("load_checkpoint: non-finite values in " + file.string());
  return ParamVector(layout, std::move(values));
}

}  // namespace fedsim
