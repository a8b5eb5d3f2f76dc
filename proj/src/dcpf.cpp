#include "pfcat/dcpf.hpp"

#include <ostream>

#include "pfcat/csv.hpp"

namespace pfcat {

template class SusceptanceSystem<double>;
template SusceptanceSystem<double> build_system(const NetworkModel&, const BranchState<double>&);
template FlowSolution<double> solve_flows(const SusceptanceSystem<double>&, const VectorX<double>&);
template FlowSolution<double> solve_with_outage(const NetworkModel&, const VectorX<double>&, LineIndex);

void write_matrix_coordinates(std::ostream& out, const Eigen::SparseMatrix<double>& matrix) {
  for (int k = 0; k < matrix.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, k); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << csv::format_number(it.value()) << '\n';
}

}  // namespace pfcat
