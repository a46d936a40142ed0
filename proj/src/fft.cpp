#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace speckle::detail {

namespace {

std::mutex g_plan_mutex;

fftw_plan plan_for(int n, int sign) {
    static std::map<std::pair<int, int>, fftw_plan> cache;
    std::lock_guard lock(g_plan_mutex);
    auto key = std::make_pair(n, sign);
    auto it = cache.find(key);
    if (it != cache.end())
        return it->second;
    fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(n));
    fftw_plan p = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    cache.emplace(key, p);
    return p;
}

void run(cvec& data, int sign) {
    if (data.empty())
        return;
    fftw_plan p = plan_for(static_cast<int>(data.size()), sign);
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(p, ptr, ptr);
}

} // namespace

void fft_forward(cvec& data) { run(data, FFTW_FORWARD); }

void fft_inverse(cvec& data) { run(data, FFTW_BACKWARD); }

cvec fft_centered(const cvec& data) {
    cvec tmp = data;
    fft_forward(tmp);
    const std::size_t n = tmp.size();
    cvec out(n);
    for (std::size_t k = 0; k < n; ++k)
        out[(k + n / 2) % n] = tmp[k];
    return out;
}

} // namespace speckle::detail
