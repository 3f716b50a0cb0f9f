#pragma once

namespace greensentry {

/// Selects between the serial reference path and the OpenMP path of a
/// data-parallel kernel. Both produce bit-identical results.
enum class Execution { serial, parallel };

}  // namespace greensentry
