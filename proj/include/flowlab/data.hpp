#pragma once

#include <vector>

#include "flowlab/rng.hpp"
#include "flowlab/types.hpp"

namespace flowlab {

// Parameterized conditional Gaussian-mixture targets. The default bench is
// one-dimensional with two classes; higher dimensions and multi-component
// classes exist for property and smoke tests.
struct GaussComponent {
    Vec mean;
    double stddev = 1.0;
};

struct DataSpec {
    int dim = 1;
    std::vector<std::vector<GaussComponent>> classes;  // component list per class
    std::vector<double> label_values;                  // value embedded for each class

    int num_classes() const { return static_cast<int>(classes.size()); }
    void validate() const;

    // Class 0 ~ N(-1.5, 0.2^2), class 1 ~ N(+1.5, 0.2^2).
    static DataSpec two_class_1d();
    static DataSpec single_class_1d(double mean, double stddev);
};

// n i.i.d. draws from the class-y mixture; rows are samples.
Mat sample_conditional(const DataSpec& spec, int y, int n, Rng& rng);

// 1D fast path.
Arr sample_conditional_1d(const DataSpec& spec, int y, int n, Rng& rng);
double draw_conditional_1d(const DataSpec& spec, int y, Rng& rng);

}  // namespace flowlab
