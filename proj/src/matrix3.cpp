#include "manakov/matrix3.hpp"

namespace manakov {

Complex3x3 expm_taylor(const Complex3x3& a) {
    // scale so that ||a / 2^s|| <= 1/8, then 18 Taylor terms and s squarings
    double nrm = 0.0;
    for (int i = 0; i < 3; ++i) {
        double row = 0.0;
        for (int j = 0; j < 3; ++j) row += std::abs(a(i, j));
        nrm = std::max(nrm, row);
    }
    int s = 0;
    while (nrm > 0.125) {
        nrm *= 0.5;
        ++s;
    }
    const Complex3x3 b = a * std::ldexp(1.0, -s);
    Complex3x3 term = Complex3x3::identity();
    Complex3x3 sum = term;
    for (int k = 1; k <= 18; ++k) {
        term = term * b * (1.0 / k);
        sum += term;
    }
    for (int k = 0; k < s; ++k) sum = sum * sum;
    return sum;
}

}  // namespace manakov
