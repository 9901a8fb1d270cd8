#include "afcmem/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace afc::fft {

namespace {

// FFTW planning is not thread safe; execution with the new-array interface is.
class PlanCache {
public:
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_)
            fftw_destroy_plan(plan);
    }

    fftw_plan get(int n, int sign)
    {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end())
            return it->second;
        std::vector<std::complex<double>> scratch(static_cast<std::size_t>(n));
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan == nullptr)
            throw std::runtime_error("fftw: failed to create plan");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& cache()
{
    static PlanCache instance;
    return instance;
}

void execute(std::span<std::complex<double>> data, int sign)
{
    if (data.empty())
        return;
    fftw_plan plan = cache().get(static_cast<int>(data.size()), sign);
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, buf, buf);
}

} // namespace

void forward(std::span<std::complex<double>> data)
{
    execute(data, FFTW_FORWARD);
}

void inverse(std::span<std::complex<double>> data)
{
    execute(data, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(data.size());
    for (auto& v : data)
        v *= scale;
}

} // namespace afc::fft
