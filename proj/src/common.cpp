#include "owsc/common.hpp"

#include <cstdio>

namespace owsc {

void matmul(const Mat& A, const Mat& B, Mat& C, bool accumulate) {
    if (C.rows != A.rows || C.cols != B.cols) C = Mat(A.rows, B.cols);
    if (!accumulate) C.zero();
    for (int i = 0; i < A.rows; ++i) {
        const double* ai = A.row(i);
        double* ci = C.row(i);
        for (int k = 0; k < A.cols; ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = B.row(k);
            for (int j = 0; j < B.cols; ++j) ci[j] += aik * bk[j];
        }
    }
}

void matmul_nt(const Mat& A, const Mat& B, Mat& C, bool accumulate) {
    if (C.rows != A.rows || C.cols != B.rows) C = Mat(A.rows, B.rows);
    if (!accumulate) C.zero();
    for (int i = 0; i < A.rows; ++i) {
        const double* ai = A.row(i);
        double* ci = C.row(i);
        for (int j = 0; j < B.rows; ++j) {
            const double* bj = B.row(j);
            double s = 0.0;
            for (int k = 0; k < A.cols; ++k) s += ai[k] * bj[k];
            ci[j] += s;
        }
    }
}

void matmul_tn(const Mat& A, const Mat& B, Mat& C, bool accumulate) {
    if (C.rows != A.cols || C.cols != B.cols) C = Mat(A.cols, B.cols);
    if (!accumulate) C.zero();
    for (int k = 0; k < A.rows; ++k) {
        const double* ak = A.row(k);
        const double* bk = B.row(k);
        for (int i = 0; i < A.cols; ++i) {
            const double aki = ak[i];
            if (aki == 0.0) continue;
            double* ci = C.row(i);
            for (int j = 0; j < B.cols; ++j) ci[j] += aki * bk[j];
        }
    }
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return std::string(buf);
}

}  // namespace owsc
