#pragma once

#include <complex>
#include <span>
#include <vector>

namespace gazeload {

// Unnormalized forward DFT: X[k] = sum_j x[j] * exp(-2*pi*i*j*k/N).
// Arbitrary lengths: power-of-two sizes run radix-2 Cooley-Tukey, everything
// else goes through Bluestein's chirp-z so output length always equals input
// length. Throws EmptySignal on empty input.
std::vector<std::complex<double>> dft_forward(std::span<const double> signal);

std::vector<std::complex<double>> dft_forward_complex(std::vector<std::complex<double>> x);

// Inverse with the 1/N convention.
std::vector<std::complex<double>> dft_inverse(std::span<const std::complex<double>> spectrum);

// Inverse for spectra of real signals; returns the real parts.
std::vector<double> dft_inverse_real(std::span<const std::complex<double>> spectrum);

}  // namespace gazeload
