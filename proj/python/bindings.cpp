#include <pybind11/pybind11.h>

namespace py = pybind11;

PYBIND11_MODULE(_hategraph, m) {
  m.doc() = "Discussion-graph hate speech forecasting core";
}
