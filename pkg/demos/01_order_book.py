"""Price-time priority matching on an integer price grid."""
from artmarket.orderbook import BUY, SELL, Order, OrderBook, round_order_price

book = OrderBook(delta_p=0.01, max_price=20000.0)

# prices live on the grid; buys round down and sells round up
print(round_order_price(10000.006, BUY), round_order_price(10000.001, SELL))  # 1000000 1000001

# two sellers at the same level, then one at a worse price
book.submit_limit(Order(SELL, 1000100, agent_id=11, placed_tick=1))
book.submit_limit(Order(SELL, 1000100, agent_id=12, placed_tick=2))
book.submit_limit(Order(SELL, 1000300, agent_id=13, placed_tick=3))
book.submit_limit(Order(BUY, 999800, agent_id=14, placed_tick=4))
print("bid/ask:", book.best_bid, book.best_ask, "mid:", book.mid_price())

# a crossing buy trades with the earliest order at the best level
print(book.submit_limit(Order(BUY, 1000200, agent_id=20, placed_tick=5)))

# market orders walk the book one level at a time
print(book.submit_market(BUY, agent_id=-1, tick=6))
print(book.submit_market(BUY, agent_id=-1, tick=7))
print(book.submit_market(BUY, agent_id=-1, tick=8))  # nothing left: None
print("market orders hitting an empty side:", book.empty_side_market_orders)

# orders die t_c ticks after placement
print("expired:", book.expire_orders(current_tick=14, t_c=10), "left:", len(book))
