/**
 * Creates a debounced function that waits ms milliseconds between
 * invocations. If the function is called multiple times while an
 * invocation is pending, only the latest arguments are used — a steady
 * stream of calls fires at most once per window, never starves.
 */
export function debounce<A extends unknown[]>(
  ms: number,
  fn: (...args: A) => void,
) {
  let args: A;
  let pending = false;
  let timeout: ReturnType<typeof setTimeout>;

  return {
    call: (..._args: A) => {
      args = _args;
      if (!pending) {
        pending = true;
        timeout = setTimeout(() => {
          pending = false;
          fn(...args);
        }, ms);
      }
    },
    cancel: () => {
      pending = false;
      clearTimeout(timeout);
    },
    get isPending() {
      return pending;
    },
  };
}
