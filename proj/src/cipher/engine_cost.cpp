#include "seda/cipher.hpp"

namespace seda::cipher {

void EngineCostModel::validate() const {
    if (!(aes_area_units > 0) || !(aes_power_units > 0) || !(xor_bank_area_units > 0) ||
        !(xor_bank_power_units > 0) || !(aes_latency_cycles > 0) ||
        !(aes_throughput_bytes_per_cycle > 0))
        throw Error(ErrorCode::InvalidConfig, "engine cost parameters must be strictly positive");
}

EngineCost engine_cost(const EngineCostModel& model, std::uint32_t bandwidth_multiple,
                       EngineVariant variant) {
    model.validate();
    if (bandwidth_multiple < 1)
        throw Error(ErrorCode::InvalidConfig, "bandwidth multiple must be >= 1");
    const double n = bandwidth_multiple;
    if (variant == EngineVariant::TAes)
        return {n * model.aes_area_units, n * model.aes_power_units};
    // One AES engine; every extra pad per cycle costs one XOR bank.
    return {model.aes_area_units + (n - 1) * model.xor_bank_area_units,
            model.aes_power_units + (n - 1) * model.xor_bank_power_units};
}

double engine_bandwidth(const EngineCostModel& model, std::uint32_t bandwidth_multiple) {
    model.validate();
    return model.aes_throughput_bytes_per_cycle * bandwidth_multiple;
}

}  // namespace seda::cipher
