namespace mch {}
