#pragma once

#include <string>

namespace npgd {

/// Shortest decimal that round-trips the exact double; used for all result
/// files so byte-identical reproducibility is well-defined.
std::string format_double(double v);

}  // namespace npgd
