#include "upw/tensor.hpp"

#include "upw/error.hpp"

namespace upw {

Tensor::Tensor(std::size_t r, std::size_t c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != r * c) {
        throw Error(ErrorKind::Shape, "tensor of shape " + std::to_string(r) + "x" + std::to_string(c) + " given " +
                                          std::to_string(data.size()) + " elements");
    }
}

}  // namespace upw
