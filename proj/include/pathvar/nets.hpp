#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pathvar/errors.hpp"
#include "pathvar/matrix.hpp"

namespace pathvar {

struct OutputSpec {
  enum class Kind { linear, clip };
  Kind kind = Kind::linear;
  double clip_bound = 0.0;

  static OutputSpec linear() { return {Kind::linear, 0.0}; }
  static OutputSpec clip(double b) { return {Kind::clip, b}; }

  double apply(double z) const;
  void validate() const;
};

// point in the bounded input domain [-1,1]^d
class InputPoint {
 public:
  explicit InputPoint(std::vector<double> coords);
  const std::vector<double>& coords() const { return coords_; }
  std::size_t dim() const { return coords_.size(); }

 private:
  std::vector<double> coords_;
};

// One affine stage of a signed net, listed innermost first. The last stage
// is the output row (rows == 1); ReLU applies after every earlier stage.
struct DenseStage {
  Matrix weights;
  std::vector<double> offsets;  // one per output unit; empty means zeros
};

// Arbitrary signed layered ReLU network. Depth L counts weight stages
// including the output row, so L == 1 is a plain linear map and the input
// vector plays the role of the innermost unit layer.
class GeneralReLUNet {
 public:
  GeneralReLUNet(int input_dim, std::vector<DenseStage> stages, OutputSpec output);

  int input_dim() const { return input_dim_; }
  std::size_t depth() const { return stages_.size(); }
  std::size_t hidden_layers() const { return stages_.size() - 1; }
  const std::vector<DenseStage>& stages() const { return stages_; }
  const OutputSpec& output() const { return output_; }

 private:
  int input_dim_;
  std::vector<DenseStage> stages_;
  OutputSpec output_;
};

// How a user input x maps to the innermost slot vector:
//   raw           -> x                     (width d)
//   signed_pairs  -> [x, -x]               (width 2d)
//   signed_locked -> [x, 1, -x, -1]        (width 2(d+1)), canonicalize() output
enum class InputEncoding { raw, signed_pairs, signed_locked };

std::size_t encoded_width(InputEncoding enc, int input_dim);
void encode_input(InputEncoding enc, std::span<const double> x, std::vector<double>& out);

struct CanonicalStage {
  Matrix weights;                  // all entries >= 0
  std::vector<std::int8_t> signs;  // +1 -> (z)_+, -1 -> -(z)_+; empty for the output row
};

// Nonnegative-weight layered net with per-unit activation signs. Outputs of
// canonicalize() additionally carry the twin/locked structure; hand-built
// nonnegative nets (used throughout the calculators) need not.
class CanonicalNet {
 public:
  CanonicalNet(int input_dim, InputEncoding encoding, std::vector<CanonicalStage> stages,
               OutputSpec output);

  int input_dim() const { return input_dim_; }
  InputEncoding encoding() const { return encoding_; }
  std::size_t inner_width() const { return encoded_width(encoding_, input_dim_); }
  std::size_t depth() const { return stages_.size(); }
  std::size_t hidden_layers() const { return stages_.size() - 1; }
  const std::vector<CanonicalStage>& stages() const { return stages_; }
  std::vector<CanonicalStage>& mutable_stages() { return stages_; }
  const OutputSpec& output() const { return output_; }

  // true when each hidden layer splits into sign-flip twin halves whose last
  // pair is the locked +-1 unit fed from the previous locked pair
  bool has_duplicate_structure() const;

 private:
  int input_dim_;
  InputEncoding encoding_;
  std::vector<CanonicalStage> stages_;
  OutputSpec output_;
};

// Theorem 1 form: stochastic weight tables plus the input scale V
class NormalizedNet {
 public:
  NormalizedNet(CanonicalNet tables, double scale,
                std::vector<std::vector<std::uint32_t>> dead_units);

  const CanonicalNet& tables() const { return tables_; }
  double scale() const { return scale_; }  // the variation V
  const std::vector<std::vector<std::uint32_t>>& dead_units() const { return dead_units_; }

  // probability rows sum to one within tol
  void validate(double tol = 1e-12) const;

 private:
  CanonicalNet tables_;
  double scale_;
  std::vector<std::vector<std::uint32_t>> dead_units_;
};

// scratch buffers so hot loops avoid reallocating per evaluation
struct EvalScratch {
  std::vector<double> a;
  std::vector<double> b;
};

double evaluate(const GeneralReLUNet& net, const InputPoint& x);
double evaluate(const CanonicalNet& net, const InputPoint& x);
double evaluate(const NormalizedNet& net, const InputPoint& x);

// unchecked fast paths; x must already be a valid input of length input_dim()
double forward(const GeneralReLUNet& net, std::span<const double> x, EvalScratch& scratch);
double forward(const CanonicalNet& net, std::span<const double> x, EvalScratch& scratch);
double forward(const NormalizedNet& net, std::span<const double> x, EvalScratch& scratch);

// signed weights and offsets become nonnegative weights on signed duplicates
// and on the locked +-1 units; function values are preserved
CanonicalNet canonicalize(const GeneralReLUNet& net);

// adds the constant c to the represented function by loading the outermost
// locked unit pair; requires duplicate structure (or depth 1 signed_locked)
CanonicalNet shift_output_by_constant(const CanonicalNet& net, double c);

// multiplies the output row w_{j_1} by c >= 0
CanonicalNet scale_output(const CanonicalNet& net, double c);

}  // namespace pathvar
