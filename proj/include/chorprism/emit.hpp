#pragma once

// PRISM source text for projected networks.

#include <functional>
#include <string>
#include <vector>

#include "chorprism/ast.hpp"
#include "chorprism/error.hpp"
#include "chorprism/prism.hpp"
#include "chorprism/projection.hpp"

namespace chorprism {

struct EmitConfig {
  int precision = 17;  // significant digits for real literals, at least 6
  int line_width = 0;  // wrap long commands before " + "; 0 disables
  std::function<std::string(const std::string&)> label = [](const std::string& l) { return l; };
};

// PRISM rendering of an expression. Integer division is emitted as
// floor(a/b) to keep the floored semantics.
std::string to_prism(const Expr& e, const EmitConfig& cfg = {});

// Throws UnrepresentableWeight if `w` does not survive the round trip at the
// configured precision.
std::string render_weight(const Weight& w, const EmitConfig& cfg = {});

std::string render_command(const PrismCommand& c, const EmitConfig& cfg = {});

std::string emit(const PrismNetwork& net, const ChorProgram& prog, const ProjectionContext& ctx,
                 const EmitConfig& cfg = {});

// PRISM applies updates simultaneously, the choreography sequentially; an
// assignment reading a variable written earlier in the same list differs.
std::vector<Diagnostic> update_order_warnings(const PrismNetwork& net);

}  // namespace chorprism
